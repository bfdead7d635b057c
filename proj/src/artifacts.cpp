#include "meshph/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"

namespace meshph {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw Error("cannot create directory: " + path);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string metrics_json(const ExperimentConfig& config,
                         const std::map<std::string, double>& metrics,
                         const std::string& checkpoint_hash) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    std::ostringstream hash;
    hash << std::hex << config_hash(config);
    j["config_hash"] = hash.str();
    j["seed"] = config.seed;
    if (!checkpoint_hash.empty()) j["checkpoint_hash"] = checkpoint_hash;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    nlohmann::json m;
    for (const auto& [key, value] : metrics) m[key] = value;
    j["metrics"] = std::move(m);
    return j.dump(2) + "\n";
}

std::string strip_timestamp(const std::string& metrics_text) {
    auto j = nlohmann::json::parse(metrics_text);
    j.erase("timestamp");
    return j.dump(2);
}

std::string svg_line_plot(const std::string& title, const std::vector<double>& x,
                          const std::vector<std::pair<std::string, std::vector<double>>>& series,
                          bool log_y) {
    const int width = 640, height = 400, margin = 50;
    auto transform_y = [log_y](double v) {
        return log_y ? std::log10(std::max(v, 1e-300)) : v;
    };

    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool first = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (const auto& [label, ys] : series) {
            if (i >= ys.size()) continue;
            const double yv = transform_y(ys[i]);
            if (first) {
                x_min = x_max = x[i];
                y_min = y_max = yv;
                first = false;
            } else {
                x_min = std::min(x_min, x[i]);
                x_max = std::max(x_max, x[i]);
                y_min = std::min(y_min, yv);
                y_max = std::max(y_max, yv);
            }
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto px = [&](double v) {
        return margin + (v - x_min) / (x_max - x_min) * (width - 2 * margin);
    };
    auto py = [&](double v) {
        return height - margin - (transform_y(v) - y_min) / (y_max - y_min) * (height - 2 * margin);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream oss;
    oss << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    oss << "<rect width='100%' height='100%' fill='white'/>\n";
    oss << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    oss << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n";
    oss << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n";
    int color_idx = 0;
    int legend_y = margin;
    for (const auto& [label, ys] : series) {
        const char* color = colors[color_idx % 5];
        oss << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < x.size() && i < ys.size(); ++i)
            oss << px(x[i]) << "," << py(ys[i]) << " ";
        oss << "'/>\n";
        oss << "<text x='" << width - margin + 4 << "' y='" << legend_y << "' font-size='11' fill='"
            << color << "'>" << label << "</text>\n";
        legend_y += 14;
        ++color_idx;
    }
    oss << "</svg>\n";
    return oss.str();
}

} // namespace meshph
