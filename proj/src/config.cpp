#include "meshph/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "meshph/errors.hpp"

namespace meshph {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream iss(value);
    T out{};
    iss >> out;
    if (iss.fail() || !iss.eof())
        throw ConfigError("config field '" + key + "': cannot parse '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config field '" + key + "': expected true/false, got '" + value + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> table = {
        {"mesh", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mesh = v; }},
        {"box_length", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.box_length = parse_number<double>(k, v); }},
        {"dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.dt = parse_number<double>(k, v); }},
        {"steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.steps = parse_number<int>(k, v); }},
        {"cfl_target", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.cfl_target = parse_number<double>(k, v); }},
        {"train_pairs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.train_pairs = parse_number<int>(k, v); }},
        {"val_pairs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.val_pairs = parse_number<int>(k, v); }},
        {"kmax_x", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kmax_x = parse_number<int>(k, v); }},
        {"kmax_y", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kmax_y = parse_number<int>(k, v); }},
        {"wave_speed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.wave_speed = parse_number<double>(k, v); }},
        {"damped", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.damped = parse_bool(k, v); }},
        {"gamma_min", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.gamma_min = parse_number<double>(k, v); }},
        {"gamma_max", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.gamma_max = parse_number<double>(k, v); }},
        {"epochs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.epochs = parse_number<int>(k, v); }},
        {"batch", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.batch = parse_number<int>(k, v); }},
        {"learning_rate", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_number<double>(k, v); }},
        {"weight_decay", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.weight_decay = parse_number<double>(k, v); }},
        {"loss_target", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.loss_target = v; }},
        {"hidden_width", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hidden_width = parse_number<int>(k, v); }},
        {"hidden_layers", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hidden_layers = parse_number<int>(k, v); }},
        {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"variant", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.variant = v; }},
        {"test_kmax", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.test_kmax = parse_number<int>(k, v); }},
        {"test_c", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.test_c = parse_number<double>(k, v); }},
        {"test_mesh", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.test_mesh = v; }},
        {"test_pairs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.test_pairs = parse_number<int>(k, v); }},
        {"eval_rollouts", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.eval_rollouts = parse_number<int>(k, v); }},
        {"out_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
        {"sizes", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.sizes = v; }},
        {"dump_states", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.dump_states = parse_bool(k, v); }},
        {"maxwell_grid", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.maxwell_grid = parse_number<int>(k, v); }},
        {"maxwell_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.maxwell_steps = parse_number<int>(k, v); }},
        {"maxwell_cfl", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.maxwell_cfl = parse_number<double>(k, v); }},
    };
    return table;
}

} // namespace

void apply_config_override(ExperimentConfig& config, const std::string& key,
                           const std::string& value) {
    const auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError("unknown config field '" + key + "'");
    it->second(config, key, value);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream iss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_config_override(config, key, value);
    }
    validate_config(config);
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_config_text(oss.str());
}

void validate_config(const ExperimentConfig& config) {
    if (!(config.dt > 0.0)) throw ConfigError("config field 'dt': must be positive");
    if (config.steps < 1) throw ConfigError("config field 'steps': must be >= 1");
    if (!(config.cfl_target > 0.0 && config.cfl_target <= 1.0))
        throw ConfigError("config field 'cfl_target': must be in (0, 1]");
    if (config.train_pairs < 1) throw ConfigError("config field 'train_pairs': must be >= 1");
    if (config.val_pairs < 0) throw ConfigError("config field 'val_pairs': must be >= 0");
    if (config.kmax_x < 1) throw ConfigError("config field 'kmax_x': must be >= 1");
    if (config.kmax_y < 0) throw ConfigError("config field 'kmax_y': must be >= 0");
    if (!(config.wave_speed > 0.0)) throw ConfigError("config field 'wave_speed': must be positive");
    if (config.epochs < 1) throw ConfigError("config field 'epochs': must be >= 1");
    if (config.batch < 1) throw ConfigError("config field 'batch': must be >= 1");
    if (!(config.learning_rate > 0.0))
        throw ConfigError("config field 'learning_rate': must be positive");
    if (config.weight_decay < 0.0)
        throw ConfigError("config field 'weight_decay': must be nonnegative");
    if (config.gamma_min < 0.0 || config.gamma_max < config.gamma_min)
        throw ConfigError("config field 'gamma_min/gamma_max': need 0 <= min <= max");
    if (config.hidden_width < 1 || config.hidden_layers < 1)
        throw ConfigError("config field 'hidden_width/hidden_layers': must be >= 1");
    if (!(config.box_length > 0.0)) throw ConfigError("config field 'box_length': must be positive");
}

std::string config_canonical_text(const ExperimentConfig& config) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "batch = " << config.batch << "\n"
        << "box_length = " << config.box_length << "\n"
        << "cfl_target = " << config.cfl_target << "\n"
        << "damped = " << (config.damped ? "true" : "false") << "\n"
        << "dt = " << config.dt << "\n"
        << "dump_states = " << (config.dump_states ? "true" : "false") << "\n"
        << "epochs = " << config.epochs << "\n"
        << "eval_rollouts = " << config.eval_rollouts << "\n"
        << "gamma_max = " << config.gamma_max << "\n"
        << "gamma_min = " << config.gamma_min << "\n"
        << "hidden_layers = " << config.hidden_layers << "\n"
        << "hidden_width = " << config.hidden_width << "\n"
        << "kmax_x = " << config.kmax_x << "\n"
        << "kmax_y = " << config.kmax_y << "\n"
        << "learning_rate = " << config.learning_rate << "\n"
        << "loss_target = " << config.loss_target << "\n"
        << "maxwell_cfl = " << config.maxwell_cfl << "\n"
        << "maxwell_grid = " << config.maxwell_grid << "\n"
        << "maxwell_steps = " << config.maxwell_steps << "\n"
        << "mesh = " << config.mesh << "\n"
        << "seed = " << config.seed << "\n"
        << "sizes = " << config.sizes << "\n"
        << "steps = " << config.steps << "\n"
        << "test_c = " << config.test_c << "\n"
        << "test_kmax = " << config.test_kmax << "\n"
        << "test_mesh = " << config.test_mesh << "\n"
        << "test_pairs = " << config.test_pairs << "\n"
        << "train_pairs = " << config.train_pairs << "\n"
        << "val_pairs = " << config.val_pairs << "\n"
        << "variant = " << config.variant << "\n"
        << "wave_speed = " << config.wave_speed << "\n"
        << "weight_decay = " << config.weight_decay << "\n";
    return oss.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string text = config_canonical_text(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace meshph
