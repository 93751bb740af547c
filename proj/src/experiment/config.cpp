#include "sparsegrow/experiment/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

namespace {

struct Raw {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

[[noreturn]] void bad_value(const Raw& r, const char* expected) {
    throw ConfigError("line " + std::to_string(r.line) + ": key '" + r.key + "' expects " + expected + ", got '" +
                      r.value + "'");
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const Raw& r, std::string_view s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad_value(r, "a non-negative integer");
    return v;
}

double parse_real(const Raw& r, std::string_view s) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad_value(r, "a number");
    return v;
}

std::uint64_t as_uint(const Raw& r) { return parse_uint(r, r.value); }
double as_real(const Raw& r) { return parse_real(r, r.value); }

bool as_bool(const Raw& r) {
    if (r.value == "true") return true;
    if (r.value == "false") return false;
    bad_value(r, "true or false");
}

std::string as_string(const Raw& r) {
    const std::string& v = r.value;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    if (v.find('"') != std::string::npos) bad_value(r, "a string");
    return v;
}

template <class T, class F>
std::vector<T> as_list(const Raw& r, F&& element) {
    std::vector<T> out;
    const std::string v = as_string(r);
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(T(element(r, trim(item))));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const Raw&)>;

const std::map<std::string, Setter>& fields() {
    static const std::map<std::string, Setter> table = {
        {"dataset", [](auto& c, const Raw& r) { c.dataset = as_string(r); }},
        {"data_dir", [](auto& c, const Raw& r) { c.data_dir = as_string(r); }},
        {"train_limit", [](auto& c, const Raw& r) { c.train_limit = as_uint(r); }},
        {"test_limit", [](auto& c, const Raw& r) { c.test_limit = as_uint(r); }},
        {"augment", [](auto& c, const Raw& r) { c.augment = as_bool(r); }},
        {"synthetic_train", [](auto& c, const Raw& r) { c.synthetic_train = as_uint(r); }},
        {"synthetic_test", [](auto& c, const Raw& r) { c.synthetic_test = as_uint(r); }},
        {"synthetic_classes", [](auto& c, const Raw& r) { c.synthetic_classes = as_uint(r); }},
        {"synthetic_dims", [](auto& c, const Raw& r) { c.synthetic_dims = as_uint(r); }},
        {"synthetic_separation", [](auto& c, const Raw& r) { c.synthetic_separation = as_real(r); }},
        {"model", [](auto& c, const Raw& r) { c.model = as_string(r); }},
        {"hidden", [](auto& c, const Raw& r) { c.hidden = as_list<std::size_t>(r, parse_uint); }},
        {"cnn_channels1", [](auto& c, const Raw& r) { c.cnn_channels1 = as_uint(r); }},
        {"cnn_channels2", [](auto& c, const Raw& r) { c.cnn_channels2 = as_uint(r); }},
        {"label_smoothing", [](auto& c, const Raw& r) { c.label_smoothing = as_real(r); }},
        {"strategy",
         [](auto& c, const Raw& r) {
             try {
                 c.strategy = parse_strategy(as_string(r));
             } catch (const ConfigError&) {
                 bad_value(r, "one of static, set_random, gse_uniform, gse_grabo, gse_graest, rigl_dense");
             }
         }},
        {"sparsity", [](auto& c, const Raw& r) { c.sparsity = as_real(r); }},
        {"init", [](auto& c, const Raw& r) { c.init = as_string(r); }},
        {"update_period", [](auto& c, const Raw& r) { c.schedule.period = as_uint(r); }},
        {"update_end",
         [](auto& c, const Raw& r) {
             c.schedule.end_step = as_uint(r);
             c.end_step_given = true;
         }},
        {"alpha", [](auto& c, const Raw& r) { c.schedule.alpha = as_real(r); }},
        {"gamma", [](auto& c, const Raw& r) { c.schedule.gamma = as_real(r); }},
        {"lr", [](auto& c, const Raw& r) { c.lr = as_real(r); }},
        {"momentum", [](auto& c, const Raw& r) { c.momentum = as_real(r); }},
        {"weight_decay", [](auto& c, const Raw& r) { c.weight_decay = as_real(r); }},
        {"lr_drop_factor", [](auto& c, const Raw& r) { c.lr_drop_factor = as_real(r); }},
        {"lr_drops", [](auto& c, const Raw& r) { c.lr_drops = as_list<double>(r, parse_real); }},
        {"batch_size", [](auto& c, const Raw& r) { c.batch_size = as_uint(r); }},
        {"epochs", [](auto& c, const Raw& r) { c.epochs = as_uint(r); }},
        {"seed", [](auto& c, const Raw& r) { c.seed = as_uint(r); }},
        {"output_dir", [](auto& c, const Raw& r) { c.output_dir = as_string(r); }},
        {"threads", [](auto& c, const Raw& r) { c.threads = unsigned(as_uint(r)); }},
        {"deterministic", [](auto& c, const Raw& r) { c.deterministic = as_bool(r); }},
    };
    return table;
}

const char* const kRequired[] = {"dataset", "model", "strategy", "sparsity", "seed"};

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::size_t ExperimentConfig::resolved_end_step(std::size_t steps_per_epoch) const {
    if (end_step_given) return schedule.end_step;
    if (lr_drops.size() >= 2) return std::size_t(lr_drops[1] * double(steps_per_epoch));
    return std::size_t(0.6 * double(epochs * steps_per_epoch));
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> datasets{"mnist", "cifar10", "cifar100", "synthetic"};
    if (!datasets.count(dataset)) throw ConfigError("unknown dataset '" + dataset + "'");
    if (model != "mlp" && model != "small_cnn") throw ConfigError("unknown model '" + model + "'");
    if (init != "erdos_renyi" && init != "uniform") throw ConfigError("unknown init '" + init + "'");
    if (!(sparsity >= 0 && sparsity < 1)) throw ConfigError("sparsity must lie in [0, 1)");
    if (schedule.period < 1) throw ConfigError("update period T must be >= 1");
    if (!(schedule.alpha > 0 && schedule.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(schedule.gamma > 0)) throw ConfigError("gamma must be > 0");
    if (end_step_given && schedule.end_step < schedule.period) throw ConfigError("update_end must be >= update_period");
    if (!(lr > 0)) throw ConfigError("lr must be > 0");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be >= 0");
    if (!(lr_drop_factor > 0)) throw ConfigError("lr_drop_factor must be > 0");
    if (!(label_smoothing >= 0 && label_smoothing < 1)) throw ConfigError("label_smoothing must lie in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (dataset == "synthetic" && (synthetic_train == 0 || synthetic_classes < 2 || synthetic_dims == 0))
        throw ConfigError("synthetic data needs samples, >= 2 classes and >= 1 dimension");
    if (dataset == "synthetic" && augment) throw ConfigError("augmentation applies to image datasets only");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // A '#' inside quotes is part of the value.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + body + "'");
        Raw r{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), lineno};
        const auto f = fields().find(r.key);
        if (f == fields().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + r.key + "'");
        if (!seen.insert(r.key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + r.key + "'");
        f->second(c, r);
    }
    for (const char* k : kRequired)
        if (!seen.count(k)) throw ConfigError("missing required key '" + std::string(k) + "'");
    if (c.epochs == 0) c.epochs = (c.dataset == "cifar10" || c.dataset == "cifar100") ? 20 : 5;
    c.validate();
    return c;
}

void apply_environment(ExperimentConfig& config) {
    const char* env = std::getenv("SPARSEGROW_SEED");
    if (!env) return;
    Raw r{"SPARSEGROW_SEED", env, 0};
    try {
        config.seed = as_uint(r);
    } catch (const ConfigError&) {
        throw ConfigError("SPARSEGROW_SEED must be a non-negative integer, got '" + std::string(env) + "'");
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig c;
    try {
        c = parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    apply_environment(c);
    return c;
}

std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    auto join = [](const auto& v, auto fmt) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
        return "\"" + s + "\"";
    };
    os << "dataset = " << c.dataset << '\n'
       << "data_dir = \"" << c.data_dir << "\"\n"
       << "train_limit = " << c.train_limit << '\n'
       << "test_limit = " << c.test_limit << '\n'
       << "augment = " << (c.augment ? "true" : "false") << '\n'
       << "synthetic_train = " << c.synthetic_train << '\n'
       << "synthetic_test = " << c.synthetic_test << '\n'
       << "synthetic_classes = " << c.synthetic_classes << '\n'
       << "synthetic_dims = " << c.synthetic_dims << '\n'
       << "synthetic_separation = " << fmt_real(c.synthetic_separation) << '\n'
       << "model = " << c.model << '\n'
       << "hidden = " << join(c.hidden, [](std::size_t x) { return std::to_string(x); }) << '\n'
       << "cnn_channels1 = " << c.cnn_channels1 << '\n'
       << "cnn_channels2 = " << c.cnn_channels2 << '\n'
       << "label_smoothing = " << fmt_real(c.label_smoothing) << '\n'
       << "strategy = " << to_string(c.strategy) << '\n'
       << "sparsity = " << fmt_real(c.sparsity) << '\n'
       << "init = " << c.init << '\n'
       << "update_period = " << c.schedule.period << '\n';
    if (c.end_step_given) os << "update_end = " << c.schedule.end_step << '\n';
    os << "alpha = " << fmt_real(c.schedule.alpha) << '\n'
       << "gamma = " << fmt_real(c.schedule.gamma) << '\n'
       << "lr = " << fmt_real(c.lr) << '\n'
       << "momentum = " << fmt_real(c.momentum) << '\n'
       << "weight_decay = " << fmt_real(c.weight_decay) << '\n'
       << "lr_drop_factor = " << fmt_real(c.lr_drop_factor) << '\n'
       << "lr_drops = " << join(c.lr_drops, fmt_real) << '\n'
       << "batch_size = " << c.batch_size << '\n'
       << "epochs = " << c.epochs << '\n'
       << "seed = " << c.seed << '\n'
       << "output_dir = \"" << c.output_dir << "\"\n"
       << "threads = " << c.threads << '\n'
       << "deterministic = " << (c.deterministic ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace sparsegrow
