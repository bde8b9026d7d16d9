#include "qsir/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>

#include "qsir/io.hpp"

namespace qsir {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::size_t to_size(const std::string& v) {
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ArgumentError(v);
    return out;
}

std::size_t to_positive(const std::string& v) {
    const std::size_t out = to_size(v);
    if (out == 0) throw ArgumentError(v);
    return out;
}

std::vector<std::size_t> to_size_list(const std::string& v) {
    std::vector<std::size_t> out;
    for (double x : io::parse_vector(v)) {
        if (!(x >= 1.0) || x != static_cast<double>(static_cast<std::size_t>(x))) throw ArgumentError(v);
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

double to_double(const std::string& v) {
    const auto xs = io::parse_vector(v);
    if (xs.size() != 1) throw ArgumentError(v);
    return xs.front();
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ArgumentError(v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

} // namespace

std::vector<IniEntry> parse_ini(std::istream& in) {
    std::vector<IniEntry> out;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    std::vector<std::string> bad;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                bad.push_back("line " + std::to_string(line_no));
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bad.push_back("line " + std::to_string(line_no));
            continue;
        }
        out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
    }
    if (!bad.empty()) throw ConfigError(bad);
    return out;
}

ConfigError::ConfigError(std::vector<std::string> keys)
    : ArgumentError("invalid configuration: " + join(keys)), keys_(std::move(keys)) {}

ModelSpec parse_model_spec(const std::string& text, std::size_t d) {
    const auto colon = text.find(':');
    const ModelId id = parse_model_id(trim(text.substr(0, colon)));
    double theta = 1.0;
    if (colon != std::string::npos) {
        if (id != ModelId::M3) throw ArgumentError("only M3 takes a theta");
        theta = to_double(text.substr(colon + 1));
    } else if (id == ModelId::M3) {
        throw ArgumentError("M3 requires a theta, e.g. M3:5");
    }
    return ModelSpec::make(id, d, theta);
}

ExperimentConfig load_experiment_config(const std::vector<IniEntry>& entries) {
    std::map<std::string, std::string> values;
    std::vector<std::string> bad;
    for (const auto& e : entries) {
        const std::string name = e.section + "." + e.key;
        if (!values.emplace(name, e.value).second) bad.push_back(name);
    }

    ExperimentConfig cfg;
    std::set<std::string> used;
    const auto field = [&](const std::string& name, bool required,
                           const std::function<void(const std::string&)>& apply) {
        const auto it = values.find(name);
        used.insert(name);
        if (it == values.end()) {
            if (required) bad.push_back(name);
            return;
        }
        try {
            apply(it->second);
        } catch (const std::exception&) {
            bad.push_back(name);
        }
    };

    std::string kind;
    field("experiment.kind", true, [&](const std::string& v) {
        if (v != "estimation" && v != "forecast") throw ArgumentError(v);
        kind = v;
    });
    std::uint64_t seed = 0;
    std::size_t d = 0;
    double p = 2.0;
    std::vector<std::string> model_texts;
    field("experiment.seed", false, [&](const std::string& v) { seed = to_size(v); });
    field("experiment.d", true, [&](const std::string& v) {
        d = to_size(v);
        if (d < 2) throw ArgumentError(v);
    });
    field("experiment.p", false, [&](const std::string& v) {
        p = to_double(v);
        if (!(p >= 1.0)) throw ArgumentError(v);
    });
    field("experiment.models", true, [&](const std::string& v) {
        model_texts = split_list(v);
        if (model_texts.empty()) throw ArgumentError(v);
    });
    std::vector<ModelSpec> specs;
    if (d >= 2)
        for (const auto& t : model_texts) {
            try {
                specs.push_back(parse_model_spec(t, d));
            } catch (const std::exception&) {
                bad.push_back("experiment.models");
                break;
            }
        }

    TrainConfig train;
    field("training.epochs", false, [&](const std::string& v) { train.epochs = to_positive(v); });
    field("training.step_initial", false, [&](const std::string& v) {
        train.step_initial = to_double(v);
        if (!(train.step_initial > 0.0)) throw ArgumentError(v);
    });
    field("training.step_decay", false, [&](const std::string& v) {
        train.step_decay = to_double(v);
        if (!(train.step_decay > 0.0)) throw ArgumentError(v);
    });
    field("training.lloyd_iterations", false,
          [&](const std::string& v) { train.lloyd_iterations = to_size(v); });

    if (kind == "forecast") {
        cfg.kind = ExperimentConfig::Kind::forecast;
        auto& f = cfg.forecast;
        field("forecast.n", true, [&](const std::string& v) { f.n = to_positive(v); });
        field("forecast.N", false, [&](const std::string& v) { f.grid_x = to_positive(v); });
        field("forecast.m_estimation", false,
              [&](const std::string& v) { f.y_grid_estimation = to_positive(v); });
        field("forecast.m_forecast", false,
              [&](const std::string& v) { f.forecast_cells = to_positive(v); });
        field("forecast.queries", false, [&](const std::string& v) {
            std::string cur;
            for (char c : v + ";") {
                if (c == ';') {
                    if (!trim(cur).empty()) {
                        auto q = io::parse_vector(trim(cur));
                        if (q.size() != d) throw ArgumentError(v);
                        f.queries.push_back(std::move(q));
                    }
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
        });
        field("forecast.random_queries", false, [&](const std::string& v) { f.random_queries = to_size(v); });
        field("forecast.use_true_beta", false, [&](const std::string& v) { f.use_true_beta = to_bool(v); });
        if (f.queries.empty() && f.random_queries == 0) bad.push_back("forecast.queries");
        if (f.n < f.grid_x || f.n < f.forecast_cells) bad.push_back("forecast.n");
        f.specs = specs;
        f.seed = seed;
        f.norm_order = p;
        f.train = train;
    } else {
        auto& e = cfg.estimation;
        field("estimation.n_values", true, [&](const std::string& v) { e.n_values = to_size_list(v); });
        field("estimation.N_values", true, [&](const std::string& v) { e.grid_sizes = to_size_list(v); });
        field("estimation.m", false, [&](const std::string& v) { e.y_grid_size = to_positive(v); });
        field("estimation.B", false, [&](const std::string& v) { e.grids = to_positive(v); });
        field("estimation.H", false, [&](const std::string& v) { e.slices = to_positive(v); });
        field("estimation.replications", false,
              [&](const std::string& v) { e.replications = to_positive(v); });
        e.specs = specs;
        e.seed = seed;
        e.norm_order = p;
        e.train = train;
    }

    for (const auto& [name, value] : values)
        if (!used.count(name)) bad.push_back(name);
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        throw ConfigError(bad);
    }
    return cfg;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_experiment_config(parse_ini(in));
}

} // namespace qsir
