// config.cpp: parser and serialiser for run configurations

#include "stepeq/config.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace stepeq {

ConfigError::ConfigError(const std::string& src, int ln, const std::string& fld, const std::string& message)
    : std::runtime_error(src + (ln > 0 ? ":" + std::to_string(ln) : std::string()) + ": "
                         + (fld.empty() ? std::string() : "'" + fld + "': ") + message),
      source(src), line(ln), field(fld)
{
}

std::string to_string(ModelType type)
{
    switch (type) {
    case ModelType::Qubit: return "qubit";
    case ModelType::Ising: return "ising";
    case ModelType::Flat: return "flat";
    }
    return "qubit";
}

std::string to_string(PathKind kind) { return kind == PathKind::Linear ? "linear" : "geodesic"; }

std::string to_string(SweepParameter parameter)
{
    switch (parameter) {
    case SweepParameter::None: return "none";
    case SweepParameter::N: return "N";
    case SweepParameter::Phi: return "Phi";
    case SweepParameter::Beta: return "beta";
    case SweepParameter::H1: return "h1";
    case SweepParameter::Alpha: return "alpha";
    }
    return "none";
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Entry {
    std::string value;
    int line{0};
};

class Reader {
public:
    Reader(std::string source, std::map<std::string, std::map<std::string, Entry>> sections)
        : source_(std::move(source)), sections_(std::move(sections)) {}

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    bool has(const std::string& s, const std::string& key) const
    {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(key) != 0;
    }

    [[noreturn]] void fail(const std::string& s, const std::string& key, const std::string& message) const
    {
        int line = 0;
        if (has(s, key)) line = sections_.at(s).at(key).line;
        throw ConfigError(source_, line, s + "." + key, message);
    }

    std::string text(const std::string& s, const std::string& key) const { return sections_.at(s).at(key).value; }

    double number(const std::string& s, const std::string& key) const { return parse_double(s, key, text(s, key)); }

    std::uint64_t unsigned_int(const std::string& s, const std::string& key) const
    {
        return parse_unsigned(s, key, text(s, key));
    }

    std::vector<double> numbers(const std::string& s, const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : split(text(s, key))) out.push_back(parse_double(s, key, item));
        return out;
    }

    std::vector<std::uint64_t> unsigned_ints(const std::string& s, const std::string& key) const
    {
        std::vector<std::uint64_t> out;
        for (const auto& item : split(text(s, key))) out.push_back(parse_unsigned(s, key, item));
        return out;
    }

    void read(const std::string& s, const std::string& key, double& target) const
    {
        if (has(s, key)) target = number(s, key);
    }

private:
    std::string source_;
    std::map<std::string, std::map<std::string, Entry>> sections_;

    static std::vector<std::string> split(const std::string& v)
    {
        std::vector<std::string> items;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) items.push_back(trim(item));
        return items;
    }

    double parse_double(const std::string& s, const std::string& key, const std::string& v) const
    {
        double out = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
            fail(s, key, "expected a finite number, got '" + v + "'");
        }
        return out;
    }

    std::uint64_t parse_unsigned(const std::string& s, const std::string& key, const std::string& v) const
    {
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
            fail(s, key, "expected a non-negative integer, got '" + v + "'");
        }
        return out;
    }
};

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"model", {"type", "beta", "delta", "omega0", "omega1", "alpha", "omega_c", "J", "L", "h0", "h1", "betas",
                   "field_points", "g", "v0", "v1"}},
        {"noise", {"kind", "sigma_eta", "phi", "ar_amplitude", "ar_decay", "ar_coeffs", "Phi"}},
        {"protocol", {"path", "N", "n_grid", "n_min", "n_max", "n_count", "kappa", "resolution"}},
        {"sweep", {"parameter", "values"}},
        {"run", {"trajectories", "seed", "output", "threads", "format"}},
    };
    return keys;
}

template <class T>
bool strictly_increasing(const std::vector<T>& v)
{
    return std::adjacent_find(v.begin(), v.end(), [](const T& a, const T& b) { return !(a < b); }) == v.end();
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& source)
{
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, line_no, "", "malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (schema().count(current) == 0) throw ConfigError(source, line_no, current, "unknown section");
            if (sections.count(current) != 0) throw ConfigError(source, line_no, current, "section appears twice");
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line_no, "", "expected 'key = value'");
        if (current.empty()) throw ConfigError(source, line_no, "", "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (schema().at(current).count(key) == 0) throw ConfigError(source, line_no, current + "." + key, "unknown key");
        if (sections[current].count(key) != 0) throw ConfigError(source, line_no, current + "." + key, "duplicate key");
        sections[current][key] = {value, line_no};
    }

    const Reader r(source, sections);
    RunConfig c;
    c.source = source;

    // model
    if (!r.has_section("model")) throw ConfigError(source, 0, "model", "missing [model] section");
    if (!r.has("model", "type")) throw ConfigError(source, 0, "model.type", "missing model type");
    const std::string type = r.text("model", "type");
    if (type == "qubit") c.model.type = ModelType::Qubit;
    else if (type == "ising") c.model.type = ModelType::Ising;
    else if (type == "flat") c.model.type = ModelType::Flat;
    else r.fail("model", "type", "expected qubit | ising | flat");
    auto& m = c.model;
    r.read("model", "beta", m.beta);
    r.read("model", "delta", m.delta);
    r.read("model", "omega0", m.omega0);
    r.read("model", "omega1", m.omega1);
    r.read("model", "alpha", m.alpha);
    r.read("model", "omega_c", m.omega_c);
    r.read("model", "J", m.J);
    r.read("model", "h0", m.h0);
    r.read("model", "h1", m.h1);
    r.read("model", "g", m.g);
    r.read("model", "v0", m.v0);
    r.read("model", "v1", m.v1);
    if (r.has("model", "L")) {
        if (r.text("model", "L") == "infinite") m.L = 0;
        else {
            m.L = r.unsigned_int("model", "L");
            if (m.L < 2 || m.L % 2 != 0) r.fail("model", "L", "chain length must be even and at least 2, or 'infinite'");
        }
    }
    if (r.has("model", "betas")) {
        m.betas = r.numbers("model", "betas");
        for (double b : m.betas) {
            if (!(b > 0.0)) r.fail("model", "betas", "temperatures must be positive");
        }
    }
    if (r.has("model", "field_points")) {
        m.field_points = r.unsigned_int("model", "field_points");
        if (m.field_points < 2) r.fail("model", "field_points", "need at least 2 points");
    }
    if (!(m.beta > 0.0)) r.fail("model", "beta", "beta must be positive");
    if (m.type == ModelType::Qubit) {
        if (!(m.delta >= 0.0)) r.fail("model", "delta", "must be non-negative");
        if (!(m.omega_c > 0.0)) r.fail("model", "omega_c", "must be positive");
        if (!(m.alpha >= 0.0)) r.fail("model", "alpha", "must be non-negative");
        if (m.omega0 == m.omega1) r.fail("model", "omega1", "ramp endpoints must differ");
    }
    if (m.type == ModelType::Ising) {
        if (!(m.J > 0.0)) r.fail("model", "J", "must be positive");
        if (m.h0 == m.h1) r.fail("model", "h1", "field endpoints must differ");
    }
    if (m.type == ModelType::Flat) {
        if (!(m.g > 0.0)) r.fail("model", "g", "must be positive");
        if (m.v0 == m.v1) r.fail("model", "v1", "endpoints must differ");
    }

    // noise
    auto& nm = c.noise.model;
    if (r.has("noise", "kind")) {
        try {
            nm.kind = noise_kind_from_string(r.text("noise", "kind"));
        } catch (const ValidationError& e) {
            r.fail("noise", "kind", e.what());
        }
    }
    r.read("noise", "sigma_eta", nm.sigma_eta);
    r.read("noise", "phi", nm.phi);
    r.read("noise", "ar_amplitude", nm.ar.amplitude);
    r.read("noise", "ar_decay", nm.ar.decay);
    if (r.has("noise", "ar_coeffs")) nm.ar.explicit_coeffs = r.numbers("noise", "ar_coeffs");
    if (r.has("noise", "Phi")) {
        c.noise.target_phi = r.number("noise", "Phi");
        if (!(*c.noise.target_phi >= 0.0)) r.fail("noise", "Phi", "must be non-negative");
        if (nm.kind == NoiseKind::ARn || nm.kind == NoiseKind::None) {
            r.fail("noise", "Phi", "a target Phi needs a stationary kind (gwn | wiener | ar1)");
        }
    }
    if (!(nm.sigma_eta >= 0.0)) r.fail("noise", "sigma_eta", "must be non-negative");
    if (nm.kind == NoiseKind::AR1 && !(nm.phi >= 0.0 && nm.phi <= 1.0)) r.fail("noise", "phi", "must lie in [0, 1]");

    // protocol
    auto& p = c.protocol;
    if (r.has("protocol", "path")) {
        const auto kind = r.text("protocol", "path");
        if (kind == "linear") p.path = PathKind::Linear;
        else if (kind == "geodesic") p.path = PathKind::Geodesic;
        else r.fail("protocol", "path", "expected linear | geodesic");
    }
    const int grid_forms = int(r.has("protocol", "N")) + int(r.has("protocol", "n_grid")) + int(r.has("protocol", "n_min"));
    if (grid_forms > 1) r.fail("protocol", "N", "give only one of N, n_grid or n_min/n_max/n_count");
    if (r.has("protocol", "N")) {
        p.n_grid = {static_cast<std::size_t>(r.unsigned_int("protocol", "N"))};
    } else if (r.has("protocol", "n_grid")) {
        for (auto v : r.unsigned_ints("protocol", "n_grid")) p.n_grid.push_back(static_cast<std::size_t>(v));
        if (!strictly_increasing(p.n_grid)) r.fail("protocol", "n_grid", "grid must be strictly increasing");
    } else {
        std::uint64_t lo = 4;
        std::uint64_t hi = 4096;
        std::uint64_t count = 16;
        if (r.has("protocol", "n_min")) lo = r.unsigned_int("protocol", "n_min");
        if (r.has("protocol", "n_max")) hi = r.unsigned_int("protocol", "n_max");
        if (r.has("protocol", "n_count")) count = r.unsigned_int("protocol", "n_count");
        if (lo < 1 || hi < lo) r.fail("protocol", "n_max", "need 1 <= n_min <= n_max");
        for (long v : numerics::log_spaced_integers(static_cast<long>(lo), static_cast<long>(hi), count)) {
            p.n_grid.push_back(static_cast<std::size_t>(v));
        }
    }
    if (p.n_grid.empty() || p.n_grid.front() < 1) r.fail("protocol", "N", "step counts must be at least 1");
    if (r.has("protocol", "kappa")) {
        p.kappa = r.numbers("protocol", "kappa");
        for (double k : p.kappa) {
            if (!(k >= 0.0 && k <= 1.0)) r.fail("protocol", "kappa", "kappa must lie in [0, 1]");
        }
        if (!strictly_increasing(p.kappa)) r.fail("protocol", "kappa", "grid must be strictly increasing");
    }
    if (r.has("protocol", "resolution")) {
        p.resolution = r.unsigned_int("protocol", "resolution");
        if (p.resolution < 16) r.fail("protocol", "resolution", "must be at least 16");
    }

    // sweep
    if (r.has("sweep", "parameter")) {
        const auto name = r.text("sweep", "parameter");
        if (name == "N") c.sweep.parameter = SweepParameter::N;
        else if (name == "Phi") c.sweep.parameter = SweepParameter::Phi;
        else if (name == "beta") c.sweep.parameter = SweepParameter::Beta;
        else if (name == "h1") c.sweep.parameter = SweepParameter::H1;
        else if (name == "alpha") c.sweep.parameter = SweepParameter::Alpha;
        else if (name != "none") r.fail("sweep", "parameter", "expected N | Phi | beta | h1 | alpha");
        if (c.sweep.parameter != SweepParameter::None) {
            if (!r.has("sweep", "values")) r.fail("sweep", "parameter", "sweep needs a values list");
            c.sweep.values = r.numbers("sweep", "values");
            if (c.sweep.values.empty() || !strictly_increasing(c.sweep.values)) {
                r.fail("sweep", "values", "grid must be non-empty and strictly increasing");
            }
            if (c.sweep.parameter == SweepParameter::H1 && m.type != ModelType::Ising) {
                r.fail("sweep", "parameter", "h1 sweeps need the ising model");
            }
            if (c.sweep.parameter == SweepParameter::Alpha && m.type != ModelType::Qubit) {
                r.fail("sweep", "parameter", "alpha sweeps need the qubit model");
            }
            if (c.sweep.parameter == SweepParameter::Phi
                && (nm.kind == NoiseKind::None || nm.kind == NoiseKind::ARn)) {
                r.fail("sweep", "parameter", "Phi sweeps need a stationary kind (gwn | wiener | ar1)");
            }
            if (c.sweep.parameter == SweepParameter::N) {
                p.n_grid.clear();
                for (double v : c.sweep.values) {
                    if (v < 1.0 || v != std::floor(v)) r.fail("sweep", "values", "N values must be positive integers");
                    p.n_grid.push_back(static_cast<std::size_t>(v));
                }
            }
        }
    } else if (r.has("sweep", "values")) {
        r.fail("sweep", "values", "values given without a parameter");
    }

    // run
    if (r.has("run", "trajectories")) {
        c.run.trajectories = r.unsigned_int("run", "trajectories");
        if (c.run.trajectories < 1) r.fail("run", "trajectories", "must be at least 1");
    }
    if (r.has("run", "seed")) c.run.seed = r.unsigned_int("run", "seed");
    if (r.has("run", "output")) c.run.output = r.text("run", "output");
    if (r.has("run", "threads")) {
        c.run.threads = static_cast<unsigned>(r.unsigned_int("run", "threads"));
        if (c.run.threads < 1) r.fail("run", "threads", "must be at least 1");
    }
    if (r.has("run", "format")) {
        c.run.format = r.text("run", "format");
        if (c.run.format != "csv" && c.run.format != "json") r.fail("run", "format", "expected csv | json");
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_text(const RunConfig& c)
{
    std::ostringstream out;
    auto list = [](const auto& values) {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) s += ", ";
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(values[i])>>) s += format_double(values[i]);
            else s += std::to_string(values[i]);
        }
        return s;
    };
    const auto& m = c.model;
    out << "[model]\n";
    out << "type = " << to_string(m.type) << "\n";
    out << "beta = " << format_double(m.beta) << "\n";
    switch (m.type) {
    case ModelType::Qubit:
        out << "delta = " << format_double(m.delta) << "\n";
        out << "omega0 = " << format_double(m.omega0) << "\n";
        out << "omega1 = " << format_double(m.omega1) << "\n";
        out << "alpha = " << format_double(m.alpha) << "\n";
        out << "omega_c = " << format_double(m.omega_c) << "\n";
        break;
    case ModelType::Ising:
        out << "J = " << format_double(m.J) << "\n";
        out << "L = " << (m.L == 0 ? std::string("infinite") : std::to_string(m.L)) << "\n";
        out << "h0 = " << format_double(m.h0) << "\n";
        out << "h1 = " << format_double(m.h1) << "\n";
        if (!m.betas.empty()) out << "betas = " << list(m.betas) << "\n";
        out << "field_points = " << m.field_points << "\n";
        break;
    case ModelType::Flat:
        out << "g = " << format_double(m.g) << "\n";
        out << "v0 = " << format_double(m.v0) << "\n";
        out << "v1 = " << format_double(m.v1) << "\n";
        break;
    }
    const auto& n = c.noise.model;
    out << "\n[noise]\n";
    out << "kind = " << to_string(n.kind) << "\n";
    out << "sigma_eta = " << format_double(n.sigma_eta) << "\n";
    if (n.kind == NoiseKind::AR1) out << "phi = " << format_double(n.phi) << "\n";
    if (n.kind == NoiseKind::ARn) {
        out << "ar_amplitude = " << format_double(n.ar.amplitude) << "\n";
        out << "ar_decay = " << format_double(n.ar.decay) << "\n";
        if (!n.ar.explicit_coeffs.empty()) out << "ar_coeffs = " << list(n.ar.explicit_coeffs) << "\n";
    }
    if (c.noise.target_phi) out << "Phi = " << format_double(*c.noise.target_phi) << "\n";
    const auto& p = c.protocol;
    out << "\n[protocol]\n";
    out << "path = " << to_string(p.path) << "\n";
    if (c.sweep.parameter != SweepParameter::N) out << "n_grid = " << list(p.n_grid) << "\n";
    out << "kappa = " << list(p.kappa) << "\n";
    out << "resolution = " << p.resolution << "\n";
    if (c.sweep.parameter != SweepParameter::None) {
        out << "\n[sweep]\n";
        out << "parameter = " << to_string(c.sweep.parameter) << "\n";
        out << "values = " << list(c.sweep.values) << "\n";
    }
    out << "\n[run]\n";
    out << "trajectories = " << c.run.trajectories << "\n";
    if (c.run.seed) out << "seed = " << *c.run.seed << "\n";
    out << "output = " << c.run.output << "\n";
    out << "threads = " << c.run.threads << "\n";
    out << "format = " << c.run.format << "\n";
    return out.str();
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

NoiseModel resolved_noise(const RunConfig& config)
{
    NoiseModel m = config.noise.model;
    if (!config.noise.target_phi) return m;
    // Phi = factor * sigma^2 for the stationary kinds
    NoiseModel unit = m;
    unit.sigma_eta = 1.0;
    const double factor = increment_variance(unit, 0);
    m.sigma_eta = std::sqrt(*config.noise.target_phi / factor);
    return m;
}

} // namespace stepeq
