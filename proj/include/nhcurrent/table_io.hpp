#pragma once

#include "nhcurrent/fieldsolve.hpp"
#include "nhcurrent/lattice.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nhc {

/// 17 significant digits: lossless for IEEE doubles.
std::string format_number(double v);

struct ObservableRow {
    double time = 0.0;
    int site = 0;
    double rho = 0.0;
    double s = 0.0;
    double phi = 0.0;
};

struct CurrentRow {
    double time = 0.0;
    int bond_site = 0;
    int axis = 0;
    double j = 0.0;
    double delta_j = 0.0;
    double j_tilde = 0.0;
};

inline constexpr const char* observables_header = "time,site,rho,s,phi";
inline constexpr const char* currents_header = "time,bond_site,axis,j,delta_j,j_tilde";

void write_observables_csv(std::ostream& os, const std::vector<ObservableRow>& rows);
void write_currents_csv(std::ostream& os, const std::vector<CurrentRow>& rows);

/// One JSON object per line: {"time", "phi", "a", "e", "b"} with b = null in 1D.
void write_fields_ndjson(std::ostream& os, const std::vector<FieldSnapshot>& snaps);

/// Readers throw InvalidInput naming the line on malformed input.
std::vector<ObservableRow> read_observables_csv(std::istream& is);
std::vector<CurrentRow> read_currents_csv(std::istream& is);
std::vector<FieldSnapshot> read_fields_ndjson(std::istream& is);

/// Rows for existing bonds only (bonds leaving an open lattice are skipped).
std::vector<CurrentRow> current_rows(const Lattice& lat, const CurrentSet& cs);

}  // namespace nhc
