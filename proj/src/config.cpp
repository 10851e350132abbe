// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/config.hpp"

#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "humangan/errors.hpp"
#include "humangan/run_io.hpp"
#include "humangan/stats.hpp"

namespace humangan {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"run", {"seed", "threads"}},
        {"train", {"n", "iterations", "alpha", "prior_seed", "eval_open_count"}},
        {"nes", {"sigma", "r", "seed"}},
        {"generator", {"d_z", "hidden", "d_x", "init_scale", "seed"}},
        {"init",
         {"predicate", "max_attempts", "acceptable_posterior", "min_acceptable_fraction", "max_mean_posterior",
          "min_spread"}},
        {"field", {"kind", "scale", "center", "radius", "width", "value", "lower", "upper", "scale_b", "center_b"}},
        {"rater", {"noise_std", "levels", "rater_count", "seed"}},
        {"eval", {"noise_std", "levels", "rater_count", "seed"}},
        {"survey", {"min0", "max0", "min1", "max1", "resolution", "noise_std", "levels", "rater_count", "seed"}},
        {"baseline",
         {"real_count", "lr_g", "lr_d", "steps", "batch_size", "d_steps_per_g_step", "hidden", "init_scale",
          "optimizer", "adam_beta1", "adam_beta2", "generator_ema", "seed", "g_init_scale", "density_radius", "posterior_threshold"}},
        {"serve",
         {"host", "port", "data_dir", "raters_per_query", "batch_timeout_s", "assignment_timeout_s"}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    double real(const std::string& section, const std::string& key, double fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const double d = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return d;
        } catch (const std::exception&) {
            throw ConfigError(name(section, key) + ": expected a number, got '" + *v + "'");
        }
    }

    std::uint64_t count(const std::string& section, const std::string& key, std::uint64_t fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            if (!v->empty() && v->front() == '-') throw std::invalid_argument("negative");
            const auto n = std::stoull(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return n;
        } catch (const std::exception&) {
            throw ConfigError(name(section, key) + ": expected a non-negative integer, got '" + *v + "'");
        }
    }

    std::optional<std::uint64_t> seed(const std::string& section, const std::string& key) const {
        if (!raw(section, key)) return std::nullopt;
        return count(section, key, 0);
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
        return raw(section, key).value_or(fallback);
    }

    std::vector<double> reals(const std::string& section, const std::string& key, std::vector<double> fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        std::vector<double> out;
        std::istringstream is(*v);
        std::string tok;
        while (is >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError(name(section, key) + ": expected numbers, got '" + *v + "'");
            }
        }
        return out;
    }

    static std::string name(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

private:
    const pt::ptree& tree_;
};

FeatureVector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::size_t> to_sizes(const std::vector<double>& v, const std::string& key) {
    std::vector<std::size_t> out;
    for (double d : v) {
        if (!(d >= 1) || d != static_cast<double>(static_cast<std::size_t>(d)))
            throw ConfigError(key + ": layer sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(d));
    }
    return out;
}

RaterConfig read_rater(const Reader& r, const std::string& section, RaterConfig base, std::uint64_t master,
                       std::uint64_t salt) {
    base.noise_std = r.real(section, "noise_std", base.noise_std);
    base.levels = r.count(section, "levels", base.levels);
    base.rater_count = r.count(section, "rater_count", base.rater_count);
    base.seed = r.seed(section, "seed").value_or(mix_seed(master, salt));
    return base;
}

PosteriorField read_field(const Reader& r) {
    const std::string kind = r.text("field", "kind", "gaussian_bowl");
    if (kind == "gaussian_bowl") {
        return GaussianBowl{r.real("field", "scale", 2.0), to_vector(r.reals("field", "center", {}))};
    }
    if (kind == "ring") return Ring{r.real("field", "radius", 2.0), r.real("field", "width", 0.5)};
    if (kind == "plateau") {
        return Plateau{r.real("field", "value", 1.0), to_vector(r.reals("field", "lower", {})),
                       to_vector(r.reals("field", "upper", {}))};
    }
    if (kind == "bimodal") {
        const double scale = r.real("field", "scale", 1.0);
        return Bimodal{GaussianBowl{scale, to_vector(r.reals("field", "center", {-2.0, 0.0}))},
                       GaussianBowl{r.real("field", "scale_b", scale), to_vector(r.reals("field", "center_b", {2.0, 0.0}))}};
    }
    throw ConfigError("[field] kind: unknown field '" + kind + "' (gaussian_bowl, ring, plateau, bimodal)");
}

std::string join(const FeatureVector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto wrap = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("[") + section + "] " + e.what());
        }
    };
    wrap("train", [&] { train.validate(); });
    wrap("generator", [&] { generator.validate(); });
    wrap("field", [&] { humangan::validate(field); });
    wrap("rater", [&] { rater.validate(); });
    wrap("eval", [&] { eval_rater.validate(); });
    wrap("survey", [&] { survey.rater.validate(); });
    wrap("baseline", [&] { baseline.gan.validate(); });
    if (init.predicate != "coverage" && init.predicate != "none")
        throw ConfigError("[init] predicate: expected 'coverage' or 'none', got '" + init.predicate + "'");
    if (init.max_attempts < 1) throw ConfigError("[init] max_attempts must be >= 1");
    if (!(baseline.g_init_scale > 0)) throw ConfigError("[baseline] g_init_scale must be > 0");
    if (survey.resolution < 1) throw ConfigError("[survey] resolution must be >= 1");
    if (serve.port < 0 || serve.port > 65535) throw ConfigError("[serve] port must lie in 0..65535");
    if (serve.raters_per_query < 1) throw ConfigError("[serve] raters_per_query must be >= 1");
}

ExperimentConfig parse_config(const std::string& ini_text, std::optional<std::uint64_t> seed_override) {
    pt::ptree tree;
    try {
        std::istringstream is(ini_text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = allowed_keys().find(section);
        if (it == allowed_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        if (body.empty() && !body.data().empty())
            throw ConfigError("config key '" + section + "' must appear inside a section");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown config key [" + section + "] " + key);
    }

    const Reader r(tree);
    ExperimentConfig cfg;
    cfg.seed = seed_override.value_or(r.count("run", "seed", 0));
    const std::uint64_t m = cfg.seed;
    cfg.threads = r.count("run", "threads", cfg.threads);

    cfg.train.n = r.count("train", "n", cfg.train.n);
    cfg.train.iterations = r.count("train", "iterations", cfg.train.iterations);
    cfg.train.alpha = r.real("train", "alpha", cfg.train.alpha);
    cfg.train.prior_seed = r.seed("train", "prior_seed").value_or(mix_seed(m, 1));
    cfg.train.eval_open_count = r.count("train", "eval_open_count", cfg.train.eval_open_count);
    cfg.train.nes.sigma = r.real("nes", "sigma", cfg.train.nes.sigma);
    cfg.train.nes.r = r.count("nes", "r", cfg.train.nes.r);
    cfg.train.nes.seed = r.seed("nes", "seed").value_or(mix_seed(m, 2));

    cfg.generator.d_z = r.count("generator", "d_z", cfg.generator.d_z);
    cfg.generator.d_x = r.count("generator", "d_x", cfg.generator.d_x);
    cfg.generator.hidden_sizes = to_sizes(r.reals("generator", "hidden", {4, 4}), "[generator] hidden");
    cfg.generator.init_scale = r.real("generator", "init_scale", cfg.generator.init_scale);
    cfg.generator.seed = r.seed("generator", "seed").value_or(mix_seed(m, 3));

    cfg.init.predicate = r.text("init", "predicate", cfg.init.predicate);
    cfg.init.max_attempts = r.count("init", "max_attempts", cfg.init.max_attempts);
    cfg.init.acceptable_posterior = r.real("init", "acceptable_posterior", cfg.init.acceptable_posterior);
    cfg.init.min_acceptable_fraction = r.real("init", "min_acceptable_fraction", cfg.init.min_acceptable_fraction);
    cfg.init.max_mean_posterior = r.real("init", "max_mean_posterior", cfg.init.max_mean_posterior);
    cfg.init.min_spread = r.real("init", "min_spread", cfg.init.min_spread);

    cfg.field = read_field(r);
    cfg.rater = read_rater(r, "rater", cfg.rater, m, 4);
    cfg.eval_rater = read_rater(r, "eval", cfg.eval_rater, m, 5);

    cfg.survey.bounds = {{{r.real("survey", "min0", -4.0), r.real("survey", "max0", 4.0)},
                          {r.real("survey", "min1", -4.0), r.real("survey", "max1", 4.0)}}};
    cfg.survey.resolution = r.count("survey", "resolution", cfg.survey.resolution);
    cfg.survey.rater = read_rater(r, "survey", cfg.survey.rater, m, 6);

    auto& b = cfg.baseline;
    b.real_count = r.count("baseline", "real_count", b.real_count);
    b.gan.lr_g = r.real("baseline", "lr_g", b.gan.lr_g);
    b.gan.lr_d = r.real("baseline", "lr_d", b.gan.lr_d);
    b.gan.steps = r.count("baseline", "steps", b.gan.steps);
    b.gan.batch_size = r.count("baseline", "batch_size", b.gan.batch_size);
    b.gan.d_steps_per_g_step = r.count("baseline", "d_steps_per_g_step", b.gan.d_steps_per_g_step);
    b.gan.d_hidden = to_sizes(r.reals("baseline", "hidden", {16, 16}), "[baseline] hidden");
    b.gan.d_init_scale = r.real("baseline", "init_scale", b.gan.d_init_scale);
    const std::string opt = r.text("baseline", "optimizer", "adam");
    if (opt == "adam") b.gan.optimizer = GanOptimizer::adam;
    else if (opt == "sgd") b.gan.optimizer = GanOptimizer::sgd;
    else throw ConfigError("[baseline] optimizer: expected 'adam' or 'sgd', got '" + opt + "'");
    b.gan.adam_beta1 = r.real("baseline", "adam_beta1", b.gan.adam_beta1);
    b.gan.adam_beta2 = r.real("baseline", "adam_beta2", b.gan.adam_beta2);
    b.gan.generator_ema = r.real("baseline", "generator_ema", b.gan.generator_ema);
    b.gan.seed = r.seed("baseline", "seed").value_or(mix_seed(m, 7));
    b.g_init_scale = r.real("baseline", "g_init_scale", b.g_init_scale);
    b.density_radius = r.real("baseline", "density_radius", b.density_radius);
    b.posterior_threshold = r.real("baseline", "posterior_threshold", b.posterior_threshold);

    auto& s = cfg.serve;
    s.host = r.text("serve", "host", s.host);
    s.port = static_cast<int>(r.count("serve", "port", static_cast<std::uint64_t>(s.port)));
    s.data_dir = r.text("serve", "data_dir", s.data_dir);
    s.raters_per_query = r.count("serve", "raters_per_query", s.raters_per_query);
    s.batch_timeout_s = r.real("serve", "batch_timeout_s", s.batch_timeout_s);
    s.assignment_timeout_s = r.real("serve", "assignment_timeout_s", s.assignment_timeout_s);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, seed_override);
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    auto rater = [&](const RaterConfig& rc) {
        os << "noise_std = " << format_double(rc.noise_std) << "\nlevels = " << rc.levels
           << "\nrater_count = " << rc.rater_count << "\nseed = " << rc.seed << '\n';
    };
    os << "[run]\nseed = " << cfg.seed << "\nthreads = " << cfg.threads << "\n\n";
    os << "[train]\nn = " << cfg.train.n << "\niterations = " << cfg.train.iterations
       << "\nalpha = " << format_double(cfg.train.alpha) << "\nprior_seed = " << cfg.train.prior_seed
       << "\neval_open_count = " << cfg.train.eval_open_count << "\n\n";
    os << "[nes]\nsigma = " << format_double(cfg.train.nes.sigma) << "\nr = " << cfg.train.nes.r
       << "\nseed = " << cfg.train.nes.seed << "\n\n";
    os << "[generator]\nd_z = " << cfg.generator.d_z << "\nhidden =";
    for (auto h : cfg.generator.hidden_sizes) os << ' ' << h;
    os << "\nd_x = " << cfg.generator.d_x << "\ninit_scale = " << format_double(cfg.generator.init_scale)
       << "\nseed = " << cfg.generator.seed << "\n\n";
    os << "[init]\npredicate = " << cfg.init.predicate << "\nmax_attempts = " << cfg.init.max_attempts
       << "\nacceptable_posterior = " << format_double(cfg.init.acceptable_posterior)
       << "\nmin_acceptable_fraction = " << format_double(cfg.init.min_acceptable_fraction)
       << "\nmax_mean_posterior = " << format_double(cfg.init.max_mean_posterior)
       << "\nmin_spread = " << format_double(cfg.init.min_spread) << "\n\n";
    os << "[field]\n";
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GaussianBowl>) {
                os << "kind = gaussian_bowl\nscale = " << format_double(f.scale) << '\n';
                if (f.center.size()) os << "center = " << join(f.center) << '\n';
            } else if constexpr (std::is_same_v<T, Ring>) {
                os << "kind = ring\nradius = " << format_double(f.radius) << "\nwidth = " << format_double(f.width) << '\n';
            } else if constexpr (std::is_same_v<T, Plateau>) {
                os << "kind = plateau\nvalue = " << format_double(f.value) << '\n';
                if (f.lower.size()) os << "lower = " << join(f.lower) << "\nupper = " << join(f.upper) << '\n';
            } else {
                os << "kind = bimodal\nscale = " << format_double(f.first.scale)
                   << "\nscale_b = " << format_double(f.second.scale) << "\ncenter = " << join(f.first.center)
                   << "\ncenter_b = " << join(f.second.center) << '\n';
            }
        },
        cfg.field);
    os << "\n[rater]\n";
    rater(cfg.rater);
    os << "\n[eval]\n";
    rater(cfg.eval_rater);
    os << "\n[survey]\nmin0 = " << format_double(cfg.survey.bounds[0].min)
       << "\nmax0 = " << format_double(cfg.survey.bounds[0].max) << "\nmin1 = " << format_double(cfg.survey.bounds[1].min)
       << "\nmax1 = " << format_double(cfg.survey.bounds[1].max) << "\nresolution = " << cfg.survey.resolution << '\n';
    rater(cfg.survey.rater);
    const auto& b = cfg.baseline;
    os << "\n[baseline]\nreal_count = " << b.real_count << "\nlr_g = " << format_double(b.gan.lr_g)
       << "\nlr_d = " << format_double(b.gan.lr_d) << "\nsteps = " << b.gan.steps << "\nbatch_size = " << b.gan.batch_size
       << "\nd_steps_per_g_step = " << b.gan.d_steps_per_g_step << "\nhidden =";
    for (auto h : b.gan.d_hidden) os << ' ' << h;
    os << "\ninit_scale = " << format_double(b.gan.d_init_scale)
       << "\noptimizer = " << (b.gan.optimizer == GanOptimizer::adam ? "adam" : "sgd")
       << "\nadam_beta1 = " << format_double(b.gan.adam_beta1) << "\nadam_beta2 = " << format_double(b.gan.adam_beta2)
       << "\ngenerator_ema = " << format_double(b.gan.generator_ema) << "\nseed = " << b.gan.seed
       << "\ng_init_scale = " << format_double(b.g_init_scale)
       << "\ndensity_radius = " << format_double(b.density_radius)
       << "\nposterior_threshold = " << format_double(b.posterior_threshold) << '\n';
    const auto& s = cfg.serve;
    os << "\n[serve]\nhost = " << s.host << "\nport = " << s.port << '\n';
    if (!s.data_dir.empty()) os << "data_dir = " << s.data_dir << '\n';
    os << "raters_per_query = " << s.raters_per_query << "\nbatch_timeout_s = " << format_double(s.batch_timeout_s)
       << "\nassignment_timeout_s = " << format_double(s.assignment_timeout_s) << '\n';
    return os.str();
}

AcceptancePredicate make_init_predicate(const ExperimentConfig& cfg) {
    if (cfg.init.predicate == "none") return [](const std::vector<FeatureVector>&) { return true; };
    const InitConfig init = cfg.init;
    const PosteriorField field = cfg.field;
    return [init, field](const std::vector<FeatureVector>& points) {
        if (points.empty()) return false;
        double sum = 0.0;
        std::size_t acceptable = 0;
        for (const auto& p : points) {
            const double d = true_posterior(field, p);
            sum += d;
            acceptable += d >= init.acceptable_posterior;
        }
        const double n = static_cast<double>(points.size());
        return static_cast<double>(acceptable) / n >= init.min_acceptable_fraction && sum / n <= init.max_mean_posterior &&
               rms_spread(points) >= init.min_spread;
    };
}

}  // namespace humangan
