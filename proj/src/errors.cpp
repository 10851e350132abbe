// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/errors.hpp"

namespace humangan {

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size() - limit) + " more)";
    return out;
}

}  // namespace humangan
