#include "dynbc/config.hpp"

#include "dynbc/manufactured.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace dynbc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class TomlLine {
public:
    TomlLine(const std::string& text, int line) : s_(text), line_(line) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("", "line " + std::to_string(line_) + ": " + msg, line_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string key() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
            ++pos_;
        if (start == pos_) fail("expected a key");
        return s_.substr(start, pos_ - start);
    }

    json value() {
        const char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') return array();
        if (c == 't' || c == 'f') return boolean();
        return number();
    }

private:
    json basic_string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char ch = s_[pos_++];
            if (ch == '\\') {
                if (pos_ >= s_.size()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': ch = '\n'; break;
                    case 't': ch = '\t'; break;
                    case '"': ch = '"'; break;
                    case '\\': ch = '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(ch);
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    json literal_string() {
        ++pos_;
        const std::size_t end = s_.find('\'', pos_);
        if (end == std::string::npos) fail("unterminated string");
        std::string out = s_.substr(pos_, end - pos_);
        pos_ = end + 1;
        return out;
    }

    json array() {
        ++pos_;
        json arr = json::array();
        if (peek() == ']') {
            ++pos_;
            return arr;
        }
        while (true) {
            arr.push_back(value());
            const char c = peek();
            if (c == ',') {
                ++pos_;
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                continue;
            }
            if (c == ']') {
                ++pos_;
                break;
            }
            fail("expected ',' or ']' in array");
        }
        return arr;
    }

    json boolean() {
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        fail("invalid value");
    }

    json number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::string_view("+-0123456789.eE_").find(s_[pos_]) != std::string_view::npos) ++pos_;
        std::string tok = s_.substr(start, pos_ - start);
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty()) fail("invalid value");
        const char* b = tok.data();
        const char* e = b + tok.size();
        if (*b == '+') ++b;
        if (tok.find_first_of(".eE") == std::string::npos) {
            long long v = 0;
            const auto r = std::from_chars(b, e, v);
            if (r.ec != std::errc() || r.ptr != e) fail("invalid integer '" + tok + "'");
            return v;
        }
        double v = 0.0;
        const auto r = std::from_chars(b, e, v);
        if (r.ec != std::errc() || r.ptr != e) fail("invalid number '" + tok + "'");
        return v;
    }

    const std::string& s_;
    int line_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string toml_to_json(const std::string& text) {
    json doc = json::object();
    json* table = &doc;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        TomlLine p(raw, line);
        if (p.at_end()) continue;
        if (p.peek() == '[') {
            p.expect('[');
            const std::string name = p.key();
            p.expect(']');
            if (!p.at_end()) p.fail("trailing characters after table header");
            if (doc.contains(name)) p.fail("duplicate table [" + name + "]");
            doc[name] = json::object();
            table = &doc[name];
            continue;
        }
        const std::string k = p.key();
        p.expect('=');
        if (p.at_end()) p.fail("missing value for '" + k + "'");
        json v = p.value();
        if (!p.at_end()) p.fail("trailing characters after value of '" + k + "'");
        if (table->contains(k)) p.fail("duplicate key '" + k + "'");
        (*table)[k] = std::move(v);
    }
    return doc.dump();
}

// ---------------------------------------------------------------------------
// Typed reading

namespace {

class Reader {
public:
    Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_, prefix_ + ": expected a table");
    }

    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(name(k), "unknown key '" + name(k) + "'");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string name(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }
    const json& raw(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    std::string str(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_string()) throw ConfigError(name(k), name(k) + ": expected a string");
        return v.get<std::string>();
    }
    double num(const std::string& k, double def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_number()) throw ConfigError(name(k), name(k) + ": expected a number");
        return v.get<double>();
    }
    std::size_t count(const std::string& k, std::size_t def) { return to_count(k, has(k) ? &raw(k) : nullptr, def); }
    std::vector<std::size_t> counts(const std::string& k, std::vector<std::size_t> def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_array()) throw ConfigError(name(k), name(k) + ": expected an array");
        std::vector<std::size_t> out;
        for (const auto& e : v) out.push_back(to_count(k, &e, 0));
        return out;
    }
    std::vector<double> nums(const std::string& k) {
        if (!has(k)) return {};
        const json& v = raw(k);
        if (!v.is_array()) throw ConfigError(name(k), name(k) + ": expected an array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(name(k), name(k) + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::vector<std::string> strs(const std::string& k, std::vector<std::string> def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_array()) throw ConfigError(name(k), name(k) + ": expected an array");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(name(k), name(k) + ": expected strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }
    CoefficientSpec coefficient(const std::string& k, CoefficientSpec def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (v.is_number()) return {v.get<double>(), {}};
        if (v.is_string()) return {std::nullopt, v.get<std::string>()};
        throw ConfigError(name(k), name(k) + ": expected a number or a function id");
    }

private:
    std::size_t to_count(const std::string& k, const json* v, std::size_t def) {
        if (!v) return def;
        if (!v->is_number_integer() || v->get<long long>() < 0)
            throw ConfigError(name(k), name(k) + ": expected a non-negative integer");
        return static_cast<std::size_t>(v->get<long long>());
    }

    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("invalid JSON: ") + e.what());
        }
    } else {
        doc = json::parse(toml_to_json(text));
    }

    RunConfig cfg;
    cfg.source_text = text;
    {
        Reader top(doc, "");
        for (const auto& [k, v] : doc.items()) {
            if (k == "formulation") {
                const std::string f = top.str(k, "");
                try {
                    cfg.formulation = formulation_from_string(f);
                } catch (const Error&) {
                    throw ConfigError(k, "formulation: unknown value '" + f + "'");
                }
            } else if (k == "geometry") {
                Reader r(top.raw(k), k);
                const std::string kind = r.str("kind", "interval");
                if (kind == "interval") cfg.geometry.kind = GeometrySpec::Kind::interval;
                else if (kind == "square") cfg.geometry.kind = GeometrySpec::Kind::square;
                else throw ConfigError("geometry.kind", "geometry.kind: unknown value '" + kind + "'");
                cfg.geometry.n = r.count("n", cfg.geometry.n);
            } else if (k == "multiplier_mesh") {
                Reader r(top.raw(k), k);
                const std::string kind = r.str("kind", "matching");
                if (kind == "matching") cfg.multiplier.kind = MultiplierSpec::Kind::matching;
                else if (kind == "independent") cfg.multiplier.kind = MultiplierSpec::Kind::independent;
                else throw ConfigError("multiplier_mesh.kind", "multiplier_mesh.kind: unknown value '" + kind + "'");
                cfg.multiplier.m = r.count("m", 0);
                cfg.multiplier.offset = r.num("offset", 0.0);
                cfg.multiplier.ratio = r.num("ratio", 1.0);
            } else if (k == "coefficients") {
                Reader r(top.raw(k), k);
                cfg.coefficients_given = !doc[k].empty();
                cfg.kappa = r.coefficient("kappa", cfg.kappa);
                cfg.alpha = r.coefficient("alpha", cfg.alpha);
                cfg.beta = r.num("beta", cfg.beta);
            } else if (k == "data") {
                const json& d = top.raw(k);
                if (d.is_string()) {
                    cfg.data = d.get<std::string>();
                } else {
                    Reader r(d, k);
                    cfg.data = r.str("preset", cfg.data);
                    cfg.initial = r.str("initial", cfg.initial);
                    cfg.seed = static_cast<unsigned>(r.count("seed", cfg.seed));
                }
            } else if (k == "time") {
                Reader r(top.raw(k), k);
                const std::string s = r.str("scheme", to_string(cfg.scheme));
                try {
                    cfg.scheme = scheme_from_string(s);
                } catch (const Error&) {
                    throw ConfigError("time.scheme", "time.scheme: unknown value '" + s + "'");
                }
                cfg.tau = r.num("tau", cfg.tau);
                cfg.t_end = r.num("t_end", cfg.t_end);
                cfg.solver_tol = r.num("solver_tol", cfg.solver_tol);
            } else if (k == "study") {
                Reader r(top.raw(k), k);
                cfg.study_kind = r.str("kind", cfg.study_kind);
                cfg.levels = r.counts("levels", cfg.levels);
                cfg.tau_coefficient = r.num("tau_coefficient", cfg.tau_coefficient);
                cfg.tau_power = r.num("tau_power", cfg.tau_power);
                cfg.taus = r.nums("taus");
                cfg.tau_ref = r.num("tau_ref", cfg.tau_ref);
            } else if (k == "output") {
                Reader r(top.raw(k), k);
                cfg.output_directory = r.str("directory", cfg.output_directory);
                cfg.formats = r.strs("formats", cfg.formats);
            }
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

bool RunConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

const std::vector<std::string>& kappa_functions() {
    static const std::vector<std::string> ids{"linear_x", "quadratic"};
    return ids;
}

const std::vector<std::string>& alpha_functions() {
    static const std::vector<std::string> ids{"cos_arc"};
    return ids;
}

void RunConfig::validate() const {
    const bool square = geometry.kind == GeometrySpec::Kind::square;
    if (geometry.n == 0) throw ConfigError("geometry.n", "geometry.n must be at least 1");

    if (formulation == Formulation::nonlocal && !square)
        throw ConfigError("coefficients.beta/geometry", "beta>0 requires square geometry (formulation nonlocal)");
    if (formulation == Formulation::nonlocal && !(beta > 0.0) && !has_preset())
        throw ConfigError("formulation/coefficients.beta", "formulation nonlocal requires beta>0");
    if (formulation == Formulation::wentzell && beta != 0.0)
        throw ConfigError("formulation/coefficients.beta", "formulation wentzell requires beta=0");
    if ((formulation == Formulation::dirichlet || formulation == Formulation::homogeneous_dirichlet) && beta != 0.0)
        throw ConfigError("formulation/coefficients.beta", "beta is only meaningful for dynamic boundary conditions");
    if (beta > 0.0 && !square) throw ConfigError("coefficients.beta/geometry", "beta>0 requires square geometry");
    if (beta < 0.0) throw ConfigError("coefficients.beta", "coefficients.beta must be non-negative");

    if (multiplier.kind == MultiplierSpec::Kind::independent) {
        if (formulation != Formulation::wentzell && formulation != Formulation::nonlocal)
            throw ConfigError("multiplier_mesh/formulation", "independent multiplier meshes need a dynamic boundary formulation");
        if (!square) throw ConfigError("multiplier_mesh/geometry", "independent multiplier meshes require square geometry");
        if (multiplier.m != 0 && multiplier.m < 2) throw ConfigError("multiplier_mesh.m", "multiplier_mesh.m must be at least 2");
        if (multiplier.ratio <= 0.0) throw ConfigError("multiplier_mesh.ratio", "multiplier_mesh.ratio must be positive");
    }

    const auto check_coeff = [](const CoefficientSpec& c, const std::vector<std::string>& ids, const std::string& field) {
        if (!c.constant && std::find(ids.begin(), ids.end(), c.function_id) == ids.end())
            throw ConfigError(field, field + ": unknown function id '" + c.function_id + "'");
    };
    check_coeff(kappa, kappa_functions(), "coefficients.kappa");
    check_coeff(alpha, alpha_functions(), "coefficients.alpha");
    if (kappa.constant && !(*kappa.constant > 0.0)) throw ConfigError("coefficients.kappa", "coefficients.kappa must be positive");

    if (has_preset()) {
        const auto& cat = preset_catalog();
        if (std::find(cat.begin(), cat.end(), data) == cat.end())
            throw ConfigError("data.preset", "data.preset: unknown preset '" + data + "'");
        const ManufacturedCase mc = make_manufactured_case(data);
        if (mc.formulation != formulation)
            throw ConfigError("formulation/data.preset", "preset '" + data + "' uses formulation " + to_string(mc.formulation));
        if (mc.dim != geometry.dim())
            throw ConfigError("geometry/data.preset", "preset '" + data + "' lives on the " + (mc.dim == 1 ? "interval" : "square"));
        if (coefficients_given)
            throw ConfigError("coefficients/data.preset", "coefficients are fixed by the manufactured preset");
    } else if (initial != "zero" && initial != "random" && initial != "cosine") {
        throw ConfigError("data.initial", "data.initial: expected zero, random or cosine");
    }

    if (!(tau > 0.0)) throw ConfigError("time.tau", "time.tau must be positive");
    if (!(t_end > 0.0)) throw ConfigError("time.t_end", "time.t_end must be positive");
    try {
        StepperConfig{scheme, tau, t_end, solver_tol}.validate();
    } catch (const Error& e) {
        throw ConfigError("time.tau/time.t_end", e.what());
    }

    if (study_kind != "spatial" && study_kind != "temporal")
        throw ConfigError("study.kind", "study.kind: expected spatial or temporal");
    for (std::size_t n : levels)
        if (n == 0) throw ConfigError("study.levels", "study.levels entries must be at least 1");
    if (!(tau_coefficient > 0.0)) throw ConfigError("study.tau_coefficient", "study.tau_coefficient must be positive");
    for (double t : taus)
        if (!(t > 0.0)) throw ConfigError("study.taus", "study.taus entries must be positive");
    if (tau_ref < 0.0) throw ConfigError("study.tau_ref", "study.tau_ref must be non-negative");

    if (output_directory.empty()) throw ConfigError("output.directory", "output.directory must not be empty");
    for (const auto& f : formats)
        if (f != "csv" && f != "json") throw ConfigError("output.formats", "output.formats: unknown format '" + f + "'");
}

// ---------------------------------------------------------------------------
// Problem construction

CoefficientSet make_coefficients(const RunConfig& cfg) {
    CoefficientSet c;
    if (cfg.kappa.constant) {
        const double k = *cfg.kappa.constant;
        c.kappa = [k](const Point&) { return k; };
        c.c_kappa = k;
    } else if (cfg.kappa.function_id == "linear_x") {
        c.kappa = [](const Point& x) { return 1.0 + x.x; };
        c.c_kappa = 1.0;
    } else {
        c.kappa = [](const Point& x) { return 1.0 + x.x * x.x + x.y * x.y; };
        c.c_kappa = 1.0;
    }
    if (cfg.alpha.constant) {
        const double a = *cfg.alpha.constant;
        c.alpha = [a](const BoundaryPoint&) { return a; };
    } else {
        c.alpha = [](const BoundaryPoint& bp) { return 1.0 + 0.5 * std::cos(0.5 * std::numbers::pi * bp.s); };
    }
    c.beta = cfg.beta;
    return c;
}

BulkMesh make_mesh(const RunConfig& cfg, std::size_t n) {
    return cfg.geometry.kind == GeometrySpec::Kind::interval ? build_interval_mesh(n, 0.0, 1.0) : build_square_mesh(n);
}

std::optional<BoundaryMesh> make_multiplier(const RunConfig& cfg, const BulkMesh& mesh) {
    if (cfg.multiplier.kind == MultiplierSpec::Kind::matching) return std::nullopt;
    const BoundaryMesh trace = extract_boundary_mesh(mesh);
    std::size_t m = cfg.multiplier.m;
    if (m == 0) m = static_cast<std::size_t>(std::llround(cfg.multiplier.ratio * static_cast<double>(trace.num_segments())));
    return build_independent_boundary_mesh(trace, std::max<std::size_t>(m, 2), cfg.multiplier.offset);
}

PdaeSystem build_zero_data_system(const RunConfig& cfg, const BulkMesh& mesh) {
    const CoefficientSet c = make_coefficients(cfg);
    const BulkData f = [](const Point&, double) { return 0.0; };
    const BoundaryData g = [](const BoundaryPoint&, double) { return 0.0; };
    switch (cfg.formulation) {
        case Formulation::homogeneous_dirichlet: return build_homogeneous_dirichlet(mesh, c, f);
        case Formulation::dirichlet: return build_dirichlet_pdae(mesh, c, f, g);
        case Formulation::wentzell: return build_wentzell_pdae(mesh, make_multiplier(cfg, mesh), c, f, g);
        case Formulation::nonlocal: return build_nonlocal_pdae(mesh, make_multiplier(cfg, mesh), c, f, g);
    }
    throw InvalidArgument("unknown formulation");
}

std::string git_blob_hash(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

}  // namespace dynbc
