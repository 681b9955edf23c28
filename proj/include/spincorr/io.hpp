// Config parsing (JSON), normalized config echo + hash, and CSV emission.
// Angles cross this boundary in degrees; everything behind it is radians.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spincorr/bell.hpp"
#include "spincorr/montecarlo.hpp"

namespace spincorr::io {

/// Schema violation with a field path, e.g. "phase.fringe_spacing".
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One analytic-table cell: an angle in degrees or a removed polarizer.
struct Cell {
    bool removed = false;
    double value = 0.0;

    static Cell angle_deg(double v) { return {false, v}; }
    static Cell r() { return {true, 0.0}; }
};

struct AnalyticRequest {
    std::string formula;
    std::vector<std::vector<Cell>> rows;
    double v = 1.0;      // visibility, used by quad_coincidence
    double r = 1.0;      // splitter ratio, used by eberhard
    double phi_deg = 0.0;
};

struct BellRequest {
    std::vector<double> v_values = {1.0};
    bell::VisibilityConvention convention = bell::VisibilityConvention::Fringe;
    std::optional<bell::AngleQuadruple> quadruple;  // unset: optimize
    double grid_step_deg = 0.5;
    bool refine = true;
};

struct ScanRequest {
    std::vector<double> v_values = {1.0, 0.87, 0.8};
    std::vector<bell::VisibilityConvention> conventions = {
        bell::VisibilityConvention::Fringe, bell::VisibilityConvention::CosSquared};
    std::vector<double> r_values = {1.0, 0.8, 0.6, 0.5, 0.4, 0.31, 0.2};
    double eberhard_v = 1.0;
    double grid_step_deg = 0.5;
};

struct AppConfig {
    ExperimentConfig experiment;
    int threads = 0;
    AnalyticRequest analytic;
    BellRequest bell;
    ScanRequest scan;
    nlohmann::json normalized;  // canonical echo of the parsed document
};

AppConfig parse_config(const nlohmann::json& doc);
AppConfig load_config_file(const std::string& path);

/// FNV-1a over the canonical dump of the normalized document.
std::string config_hash_hex(const nlohmann::json& normalized);

/// Locale-independent shortest-faithful formatting, >= 6 significant digits.
std::string format_number(double value);

/// CSV with a '#'-prefixed comment header block; the data section (header
/// row + data rows) is what determinism guarantees cover.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void comment(const std::string& key, const std::string& value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

  private:
    std::ostream& out_;
};

}  // namespace spincorr::io
