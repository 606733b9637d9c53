#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/error.hpp"
#include "dynbc/pdae.hpp"
#include "dynbc/time_integration.hpp"
#include "dynbc/verification.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dynbc {

/// Malformed or inconsistent configuration. `field` names the offending key
/// (or pair of keys, "a/b"); `line` is set for syntax errors in TOML input.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what, int line = 0)
        : Error(what), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

struct GeometrySpec {
    enum class Kind { interval, square } kind = Kind::interval;
    std::size_t n = 16;
    int dim() const { return kind == Kind::interval ? 1 : 2; }
};

struct MultiplierSpec {
    enum class Kind { matching, independent } kind = Kind::matching;
    std::size_t m = 0;      ///< number of multiplier segments
    double offset = 0.0;    ///< arc-length shift of the first vertex
    double ratio = 1.0;     ///< studies: m = ratio × trace segments
};

/// Scalar coefficient given either as a constant or as a named function.
struct CoefficientSpec {
    std::optional<double> constant;
    std::string function_id;
};

struct RunConfig {
    Formulation formulation = Formulation::wentzell;
    GeometrySpec geometry;
    MultiplierSpec multiplier;
    CoefficientSpec kappa{1.0, {}};
    CoefficientSpec alpha{0.0, {}};
    double beta = 0.0;
    /// True when the config sets any coefficient explicitly.
    bool coefficients_given = false;
    /// Manufactured preset id, or "zero" for f = g = 0.
    std::string data = "zero";
    /// Initial bulk state for zero data: "zero", "random" or "cosine".
    std::string initial = "cosine";
    unsigned seed = 1;
    Scheme scheme = Scheme::implicit_euler;
    double tau = 0.01;
    double t_end = 0.5;
    double solver_tol = 1e-12;

    // Study and inf-sup settings.
    std::string study_kind = "spatial";
    std::vector<std::size_t> levels{4, 8, 16, 32};
    double tau_coefficient = 0.1;
    double tau_power = 1.0;
    std::vector<double> taus;
    double tau_ref = 0.0;

    std::string output_directory = "output";
    std::vector<std::string> formats{"csv", "json"};

    /// Raw configuration text, hashed into the run manifest.
    std::string source_text;

    bool has_preset() const { return data != "zero"; }
    /// Cross-field checks; throws ConfigError naming the field pair.
    void validate() const;
    bool wants(const std::string& format) const;
};

/// Flat TOML subset: `[section]` headers, `key = value` with strings,
/// numbers, booleans and single-line arrays, `#` comments. Returns the
/// document as JSON text (objects one level deep).
std::string toml_to_json(const std::string& text);

/// Parses TOML or JSON (chosen by the first non-blank character).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Named coefficient functions accepted in configs, in stable order.
const std::vector<std::string>& kappa_functions();
const std::vector<std::string>& alpha_functions();

CoefficientSet make_coefficients(const RunConfig& cfg);
BulkMesh make_mesh(const RunConfig& cfg, std::size_t n);
std::optional<BoundaryMesh> make_multiplier(const RunConfig& cfg, const BulkMesh& mesh);
/// System for f = g = 0 and the configured coefficients.
PdaeSystem build_zero_data_system(const RunConfig& cfg, const BulkMesh& mesh);

/// Git blob hash (SHA-1 of "blob <size>\0<content>") as lowercase hex.
std::string git_blob_hash(const std::string& content);

}  // namespace dynbc
