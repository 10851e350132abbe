// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/generator.hpp"

#include <fstream>
#include <sstream>

#include "humangan/errors.hpp"

namespace humangan {

namespace {

constexpr const char* kCheckpointMagic = "humangan-generator-checkpoint v1";

void check_latent(const GeneratorParams& params, const LatentVector& z) {
    if (static_cast<std::size_t>(z.size()) != params.d_z())
        throw ConfigError("latent vector has dimension " + std::to_string(z.size()) + ", generator expects " +
                          std::to_string(params.d_z()));
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void GeneratorConfig::validate() const {
    if (d_z < 1 || d_x < 1) throw ConfigError("generator d_z and d_x must be >= 1");
    for (std::size_t h : hidden_sizes)
        if (h < 1) throw ConfigError("generator hidden sizes must be >= 1");
    if (!(init_scale > 0)) throw ConfigError("generator init_scale must be > 0");
}

std::vector<std::size_t> GeneratorConfig::layer_sizes() const {
    std::vector<std::size_t> sizes{d_z};
    sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    sizes.push_back(d_x);
    return sizes;
}

std::vector<LatentVector> sample_prior(std::size_t n, std::size_t d_z, std::uint64_t seed) {
    if (d_z < 1) throw ConfigError("d_z must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<LatentVector> out(n, LatentVector(static_cast<Eigen::Index>(d_z)));
    for (auto& z : out)
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = dist(rng);
    return out;
}

FeatureVector forward(const GeneratorParams& params, const LatentVector& z) {
    check_latent(params, z);
    return params.net.forward(z);
}

std::vector<FeatureVector> forward(const GeneratorParams& params, std::span<const LatentVector> z) {
    std::vector<FeatureVector> out;
    out.reserve(z.size());
    for (const auto& zi : z) out.push_back(forward(params, zi));
    return out;
}

Matrix jacobian(const GeneratorParams& params, const LatentVector& z) {
    check_latent(params, z);
    return params.net.parameter_jacobian(z);
}

GeneratorParams random_params(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    return {Mlp::random(config.layer_sizes(), OutputActivation::identity, config.init_scale, seed)};
}

InitResult init_params(const GeneratorConfig& config, const AcceptancePredicate& accept,
                       std::span<const LatentVector> prior, std::size_t max_attempts) {
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    config.validate();
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        GeneratorParams params = random_params(config, mix_seed(config.seed, attempt));
        if (accept(forward(params, prior))) return {std::move(params), attempt + 1};
    }
    throw InitializationError("no acceptable generator initialization within " + std::to_string(max_attempts) +
                                  " attempts",
                              max_attempts);
}

const std::string& GeneratorCheckpoint::get(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    throw ParseError("checkpoint has no key '" + key + "'");
}

bool GeneratorCheckpoint::has(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return true;
    return false;
}

std::string format_checkpoint(const GeneratorParams& params, std::uint64_t seed, const Metadata& metadata) {
    std::ostringstream os;
    os << kCheckpointMagic << '\n';
    os << "layer_sizes =";
    for (std::size_t s : params.net.sizes()) os << ' ' << s;
    os << '\n' << "seed = " << seed << '\n';
    for (const auto& [k, v] : metadata) os << k << " = " << v << '\n';
    const Vector flat = params.net.flatten();
    os << "parameters = " << flat.size() << '\n';
    for (Eigen::Index i = 0; i < flat.size(); ++i) os << format_double(flat[i]) << '\n';
    return os.str();
}

GeneratorCheckpoint parse_checkpoint(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || trim(line) != kCheckpointMagic)
        throw ParseError("not a generator checkpoint (missing header line)");

    GeneratorCheckpoint ckpt;
    std::vector<std::size_t> sizes;
    bool have_seed = false;
    long long count = -1;
    int line_no = 1;
    while (count < 0 && std::getline(is, line)) {
        ++line_no;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("checkpoint line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "layer_sizes") {
            std::istringstream vs(value);
            std::size_t s;
            while (vs >> s) sizes.push_back(s);
        } else if (key == "seed") {
            ckpt.seed = std::stoull(value);
            have_seed = true;
        } else if (key == "parameters") {
            count = std::stoll(value);
        } else {
            ckpt.metadata.emplace_back(key, value);
        }
    }
    if (sizes.size() < 2) throw ParseError("checkpoint is missing layer_sizes");
    if (!have_seed) throw ParseError("checkpoint is missing seed");
    if (count < 0) throw ParseError("checkpoint is missing parameters count");

    Mlp net;
    try {
        net = Mlp(sizes, OutputActivation::identity);
    } catch (const ConfigError& e) {
        throw ParseError(std::string("checkpoint architecture invalid: ") + e.what());
    }
    if (static_cast<std::size_t>(count) != net.parameter_count())
        throw ParseError("checkpoint declares " + std::to_string(count) + " parameters, architecture needs " +
                         std::to_string(net.parameter_count()));
    Vector flat(count);
    for (long long i = 0; i < count; ++i) {
        if (!std::getline(is, line)) throw ParseError("checkpoint truncated at parameter " + std::to_string(i));
        try {
            flat[i] = std::stod(trim(line));
        } catch (const std::exception&) {
            throw ParseError("checkpoint parameter " + std::to_string(i) + " is not a number: '" + line + "'");
        }
    }
    net.assign(flat);
    if (!net.finite()) throw ParseError("checkpoint contains non-finite parameters");
    ckpt.params.net = std::move(net);
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const GeneratorParams& params, std::uint64_t seed,
                     const Metadata& metadata) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << format_checkpoint(params, seed, metadata);
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

GeneratorCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace humangan
