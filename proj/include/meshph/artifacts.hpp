#ifndef MESHPH_ARTIFACTS_HPP
#define MESHPH_ARTIFACTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "meshph/config.hpp"

namespace meshph {

inline constexpr const char* kToolVersion = "meshph 0.1.0";

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

/// metrics.json with config hash, seed, tool version, optional checkpoint
/// hash, and a timestamp field (the only non-reproducible field).
std::string metrics_json(const ExperimentConfig& config,
                         const std::map<std::string, double>& metrics,
                         const std::string& checkpoint_hash = "");

/// Strip the timestamp so reruns can be compared bitwise.
std::string strip_timestamp(const std::string& metrics_text);

/// Minimal self-contained polyline plot; one series per (label, y) pair.
std::string svg_line_plot(const std::string& title, const std::vector<double>& x,
                          const std::vector<std::pair<std::string, std::vector<double>>>& series,
                          bool log_y = false);

} // namespace meshph

#endif
