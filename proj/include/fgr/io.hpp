#pragma once

#include "fgr/footprint.hpp"
#include "fgr/generator.hpp"
#include "fgr/synthetic.hpp"

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgr {

inline constexpr int kFootprintFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

/// Raised for unreadable or malformed files, and for format-version mismatches.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decimal with 17 significant digits; negative zero is written "-0.0".
std::string format_double(double v);
double parse_double(const std::string& s);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Dataset records: one JSON object per line with keys
//   domain_id, prompt, report, keywords, patches [, is_pseudo]
std::string slide_record(const Slide& slide, bool is_pseudo = false);
Slide parse_slide_record(const std::string& line);
std::string dataset_text(std::span<const Slide> slides);
std::vector<Slide> parse_dataset(const std::string& text);
void write_dataset(const std::filesystem::path& path, std::span<const Slide> slides);
std::vector<Slide> read_dataset(const std::filesystem::path& path);

// Footprint file: JSON object with keys
//   format_version, domain_id, organ_token, D, K, H, codewords, histograms,
//   mu_N, sigma_N, style_prototype
std::string footprint_text(const DomainFootprint& fp);
DomainFootprint parse_footprint(const std::string& text);
void write_footprint(const std::filesystem::path& path, const DomainFootprint& fp);
DomainFootprint read_footprint(const std::filesystem::path& path);

// Checkpoint: JSON object with keys format_version, config, params; each
// parameter is {rows, cols, data} with data in row-major order.
std::string checkpoint_text(const GeneratorModel& model);
GeneratorModel parse_checkpoint(const std::string& text);
void write_checkpoint(const std::filesystem::path& path, const GeneratorModel& model);
GeneratorModel read_checkpoint(const std::filesystem::path& path);

}  // namespace fgr
