#include "nhcurrent/table_io.hpp"

#include "nhcurrent/error.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace nhc {

std::string format_number(double v) {
    char buf[40];
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_array(std::ostream& os, const SiteField& f) {
    os << '[';
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (i) os << ',';
        os << format_number(f[i]);
    }
    os << ']';
}

void write_vector_field(std::ostream& os, const VectorField& v) {
    os << '[';
    for (int a = 0; a < v.dim(); ++a) {
        if (a) os << ',';
        write_array(os, v[a]);
    }
    os << ']';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw InvalidInput("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    return v;
}

int parse_int(const std::string& s, std::size_t line) {
    const double v = parse_double(s, line);
    if (v != std::floor(v)) throw InvalidInput("line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
    return static_cast<int>(v);
}

template <class Row, class Fill>
std::vector<Row> read_table(std::istream& is, const char* header, std::size_t columns, Fill fill) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line) || line != header)
        throw InvalidInput(std::string("line 1: expected header '") + header + "'");
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != columns)
            throw InvalidInput("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                               " columns, got " + std::to_string(cells.size()));
        rows.push_back(fill(cells, lineno));
    }
    return rows;
}

SiteField json_array(const nlohmann::json& j, std::size_t line) {
    if (!j.is_array()) throw InvalidInput("line " + std::to_string(line) + ": expected an array");
    SiteField f(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidInput("line " + std::to_string(line) + ": expected numbers");
        f[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return f;
}

VectorField json_vector_field(const nlohmann::json& j, std::size_t line) {
    if (!j.is_array()) throw InvalidInput("line " + std::to_string(line) + ": expected a per-axis array");
    VectorField v;
    for (const auto& c : j) v.axis.push_back(json_array(c, line));
    return v;
}

}  // namespace

void write_observables_csv(std::ostream& os, const std::vector<ObservableRow>& rows) {
    os << observables_header << '\n';
    for (const auto& r : rows)
        os << format_number(r.time) << ',' << r.site << ',' << format_number(r.rho) << ',' << format_number(r.s)
           << ',' << format_number(r.phi) << '\n';
}

void write_currents_csv(std::ostream& os, const std::vector<CurrentRow>& rows) {
    os << currents_header << '\n';
    for (const auto& r : rows)
        os << format_number(r.time) << ',' << r.bond_site << ',' << r.axis << ',' << format_number(r.j) << ','
           << format_number(r.delta_j) << ',' << format_number(r.j_tilde) << '\n';
}

void write_fields_ndjson(std::ostream& os, const std::vector<FieldSnapshot>& snaps) {
    for (const auto& s : snaps) {
        os << "{\"time\":" << format_number(s.time) << ",\"phi\":";
        write_array(os, s.phi);
        os << ",\"a\":";
        write_vector_field(os, s.a);
        os << ",\"e\":";
        write_vector_field(os, s.e);
        os << ",\"b\":";
        if (s.b)
            write_array(os, *s.b);
        else
            os << "null";
        os << "}\n";
    }
}

std::vector<ObservableRow> read_observables_csv(std::istream& is) {
    return read_table<ObservableRow>(is, observables_header, 5, [](const auto& c, std::size_t l) {
        return ObservableRow{parse_double(c[0], l), parse_int(c[1], l), parse_double(c[2], l),
                             parse_double(c[3], l), parse_double(c[4], l)};
    });
}

std::vector<CurrentRow> read_currents_csv(std::istream& is) {
    return read_table<CurrentRow>(is, currents_header, 6, [](const auto& c, std::size_t l) {
        return CurrentRow{parse_double(c[0], l), parse_int(c[1], l),    parse_int(c[2], l),
                          parse_double(c[3], l), parse_double(c[4], l), parse_double(c[5], l)};
    });
}

std::vector<FieldSnapshot> read_fields_ndjson(std::istream& is) {
    std::vector<FieldSnapshot> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidInput("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("time") || !j.contains("phi") || !j.contains("a") || !j.contains("e") ||
            !j.contains("b"))
            throw InvalidInput("line " + std::to_string(lineno) + ": missing field snapshot keys");
        if (!j["time"].is_number()) throw InvalidInput("line " + std::to_string(lineno) + ": time must be a number");
        FieldSnapshot s;
        s.time = j["time"].get<double>();
        s.phi = json_array(j["phi"], lineno);
        s.a = json_vector_field(j["a"], lineno);
        s.e = json_vector_field(j["e"], lineno);
        if (!j["b"].is_null()) s.b = json_array(j["b"], lineno);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CurrentRow> current_rows(const Lattice& lat, const CurrentSet& cs) {
    std::vector<CurrentRow> rows;
    for (int x = 0; x < lat.size(); ++x)
        for (int a = 0; a < lat.dim(); ++a)
            if (lat.neighbor(x, a, +1))
                rows.push_back({cs.time, x, a, cs.j[a][x], cs.delta_j[a][x], cs.j_tilde[a][x]});
    return rows;
}

}  // namespace nhc
