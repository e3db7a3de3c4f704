#include "demuxsr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "demuxsr/errors.hpp"
#include "demuxsr/io_util.hpp"

namespace demuxsr {

namespace {

// Minimal structured value: scalar, [v, ...] array or {k: v, ...} map.
struct Value {
    enum class Kind { scalar, array, map };
    Kind kind = Kind::scalar;
    std::string scalar;
    std::vector<Value> items;
    std::vector<std::pair<std::string, Value>> entries;
};

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

class ValueParser {
public:
    explicit ValueParser(const std::string& text) : text_(text) {}

    Value parse() {
        Value v = parse_value();
        skip_space();
        if (pos_ != text_.size())
            throw config_error("config: trailing characters after value '" +
                               text_ + "'");
        return v;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    Value parse_value() {
        skip_space();
        if (pos_ >= text_.size())
            throw config_error("config: missing value");
        if (text_[pos_] == '[') return parse_array();
        if (text_[pos_] == '{') return parse_map();
        return parse_scalar();
    }

    Value parse_array() {
        Value v;
        v.kind = Value::Kind::array;
        ++pos_;  // consume '['
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
        }
        for (;;) {
            v.items.push_back(parse_value());
            skip_space();
            if (pos_ >= text_.size())
                throw config_error("config: unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return v;
            }
            throw config_error("config: expected ',' or ']' in array");
        }
    }

    Value parse_map() {
        Value v;
        v.kind = Value::Kind::map;
        ++pos_;  // consume '{'
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == '}') {
            ++pos_;
            return v;
        }
        for (;;) {
            skip_space();
            const std::size_t colon = text_.find(':', pos_);
            if (colon == std::string::npos)
                throw config_error("config: expected 'key: value' in map");
            const std::string key = trim(text_.substr(pos_, colon - pos_));
            if (key.empty() || key.find_first_of("{}[],") != std::string::npos)
                throw config_error("config: bad map key '" + key + "'");
            pos_ = colon + 1;
            v.entries.emplace_back(key, parse_value());
            skip_space();
            if (pos_ >= text_.size())
                throw config_error("config: unterminated map");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == '}') {
                ++pos_;
                return v;
            }
            throw config_error("config: expected ',' or '}' in map");
        }
    }

    Value parse_scalar() {
        Value v;
        if (text_[pos_] == '"') {
            const std::size_t close = text_.find('"', pos_ + 1);
            if (close == std::string::npos)
                throw config_error("config: unterminated string");
            v.scalar = text_.substr(pos_ + 1, close - pos_ - 1);
            pos_ = close + 1;
            return v;
        }
        const std::size_t end = text_.find_first_of(",]}", pos_);
        const std::size_t stop = end == std::string::npos ? text_.size() : end;
        v.scalar = trim(text_.substr(pos_, stop - pos_));
        pos_ = stop;
        if (v.scalar.empty()) throw config_error("config: empty value");
        return v;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

double as_double(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::scalar)
        throw config_error("config: " + key + " must be a number");
    try {
        std::size_t used = 0;
        const double x = std::stod(v.scalar, &used);
        if (used != v.scalar.size() || !std::isfinite(x))
            throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw config_error("config: " + key + " is not a finite number: '" +
                           v.scalar + "'");
    }
}

std::int64_t as_int(const Value& v, const std::string& key) {
    const double x = as_double(v, key);
    const auto rounded = static_cast<std::int64_t>(std::llround(x));
    if (std::abs(x - static_cast<double>(rounded)) > 1e-9)
        throw config_error("config: " + key + " must be an integer");
    return rounded;
}

std::string as_string(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::scalar)
        throw config_error("config: " + key + " must be a string");
    return v.scalar;
}

std::vector<double> as_double_array(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::array)
        throw config_error("config: " + key + " must be an array");
    std::vector<double> out;
    out.reserve(v.items.size());
    for (const Value& item : v.items) out.push_back(as_double(item, key));
    return out;
}

}  // namespace

std::vector<double> ScanGridSpec::positions() const {
    if (is_explicit()) return explicit_points;
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step =
        points > 1 ? (max - min) / static_cast<double>(points - 1) : 0.0;
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = min + step * static_cast<double>(i);
    return grid;
}

SourceEnsemble ExperimentConfig::ensemble() const {
    return SourceEnsemble(source_x, source_w);
}

std::vector<double> ExperimentConfig::grid_positions() const {
    if (scan_grid.is_explicit() || scan_grid.points > 0)
        return scan_grid.positions();
    ScanGridSpec def;
    def.min = -0.2 * sigma;
    def.max = 0.2 * sigma;
    def.points = 21;
    return def.positions();
}

// Canonical rendering of everything that determines results; output
// location deliberately excluded so reruns into different directories
// hash identically.
std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "allocation: " << allocation << "\n";
    out << "eps: " << fmt_double(eps) << "\n";
    out << "histogram_bins: " << histogram_bins << "\n";
    out << "n_photons: " << n_photons << "\n";
    out << "psf: " << (psf_path.empty() ? "gaussian" : psf_path) << "\n";
    out << "repetitions: " << repetitions << "\n";
    const std::vector<double> grid = grid_positions();
    out << "scan_grid: [";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << (i ? ", " : "") << fmt_double(grid[i]);
    out << "]\n";
    out << "seed: " << seed << "\n";
    out << "sigma: " << fmt_double(sigma) << "\n";
    out << "sources: [";
    for (std::size_t i = 0; i < source_x.size(); ++i)
        out << (i ? ", " : "") << "{x: " << fmt_double(source_x[i])
            << ", w: " << fmt_double(source_w[i]) << "}";
    out << "]\n";
    out << "sweep_d: [";
    for (std::size_t i = 0; i < sweep_d.size(); ++i)
        out << (i ? ", " : "") << fmt_double(sweep_d[i]);
    out << "]\n";
    out << "sweep_n: [";
    for (std::size_t i = 0; i < sweep_n.size(); ++i)
        out << (i ? ", " : "") << fmt_double(sweep_n[i]);
    out << "]\n";
    out << "theta: " << fmt_double(theta) << "\n";
    return out.str();
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical_text()); }

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t colon = stripped.find(':');
        if (colon == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key: value'");
        const std::string key = trim(stripped.substr(0, colon));
        if (!seen.insert(key).second)
            throw config_error("config: duplicate key '" + key + "'");
        const Value value = ValueParser(stripped.substr(colon + 1)).parse();

        if (key == "sources") {
            if (value.kind != Value::Kind::array || value.items.empty())
                throw config_error("config: sources must be a nonempty array");
            config.source_x.clear();
            config.source_w.clear();
            for (const Value& item : value.items) {
                if (item.kind != Value::Kind::map)
                    throw config_error(
                        "config: each source must be {x: ..., w: ...}");
                bool have_x = false, have_w = false;
                for (const auto& [k, v] : item.entries) {
                    if (k == "x") {
                        config.source_x.push_back(as_double(v, "sources.x"));
                        have_x = true;
                    } else if (k == "w") {
                        config.source_w.push_back(as_double(v, "sources.w"));
                        have_w = true;
                    } else {
                        throw config_error("config: unknown source key '" + k +
                                           "'");
                    }
                }
                if (!have_x || !have_w)
                    throw config_error(
                        "config: each source needs both x and w");
            }
        } else if (key == "sigma") {
            config.sigma = as_double(value, key);
            if (!(config.sigma > 0.0))
                throw config_error("config: sigma must be > 0");
        } else if (key == "psf") {
            const std::string s = as_string(value, key);
            config.psf_path = (s == "gaussian") ? "" : s;
        } else if (key == "n_photons") {
            config.n_photons = as_int(value, key);
            if (config.n_photons < 1)
                throw config_error("config: n_photons must be >= 1");
        } else if (key == "scan_grid") {
            if (value.kind == Value::Kind::array) {
                config.scan_grid.explicit_points =
                    as_double_array(value, key);
                if (config.scan_grid.explicit_points.size() < 3)
                    throw config_error(
                        "config: scan_grid needs >= 3 points");
            } else if (value.kind == Value::Kind::map) {
                bool have_min = false, have_max = false, have_points = false;
                for (const auto& [k, v] : value.entries) {
                    if (k == "min") {
                        config.scan_grid.min = as_double(v, "scan_grid.min");
                        have_min = true;
                    } else if (k == "max") {
                        config.scan_grid.max = as_double(v, "scan_grid.max");
                        have_max = true;
                    } else if (k == "points") {
                        config.scan_grid.points =
                            static_cast<int>(as_int(v, "scan_grid.points"));
                        have_points = true;
                    } else {
                        throw config_error(
                            "config: unknown scan_grid key '" + k + "'");
                    }
                }
                if (!have_min || !have_max || !have_points)
                    throw config_error(
                        "config: scan_grid needs min, max and points");
                if (config.scan_grid.points < 3)
                    throw config_error("config: scan_grid needs >= 3 points");
                if (!(config.scan_grid.max > config.scan_grid.min))
                    throw config_error("config: scan_grid max must be > min");
            } else {
                throw config_error(
                    "config: scan_grid must be a map or an array");
            }
        } else if (key == "repetitions") {
            config.repetitions = static_cast<int>(as_int(value, key));
            if (config.repetitions < 1)
                throw config_error("config: repetitions must be >= 1");
        } else if (key == "seed") {
            const std::int64_t s = as_int(value, key);
            if (s < 0) throw config_error("config: seed must be >= 0");
            config.seed = static_cast<std::uint64_t>(s);
        } else if (key == "output_path") {
            config.output_path = as_string(value, key);
        } else if (key == "allocation") {
            config.allocation = as_string(value, key);
            if (config.allocation != "equal" &&
                config.allocation != "proportional")
                throw config_error(
                    "config: allocation must be equal or proportional");
        } else if (key == "histogram_bins") {
            config.histogram_bins = static_cast<int>(as_int(value, key));
            if (config.histogram_bins < 0)
                throw config_error("config: histogram_bins must be >= 0");
        } else if (key == "sweep_d") {
            config.sweep_d = as_double_array(value, key);
        } else if (key == "sweep_n") {
            config.sweep_n = as_double_array(value, key);
        } else if (key == "eps") {
            config.eps = as_double(value, key);
        } else if (key == "theta") {
            config.theta = as_double(value, key);
        } else {
            throw config_error("config: unknown key '" + key + "'");
        }
    }

    if (config.source_x.size() != config.source_w.size() ||
        config.source_x.empty())
        throw config_error("config: sources must provide matching x and w");
    const std::vector<double> grid = config.grid_positions();
    if (config.n_photons < static_cast<std::int64_t>(grid.size()))
        throw config_error("config: n_photons must be >= scan points");
    std::set<double> distinct(grid.begin(), grid.end());
    if (distinct.size() != grid.size())
        throw config_error("config: scan grid positions must be distinct");
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace demuxsr
