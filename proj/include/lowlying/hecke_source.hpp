#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lowlying {

enum class FormKind { maass, holomorphic };

// Hecke eigenvalue data of one form, as ingested from the external database.
struct HeckeEigenvalueSource {
    std::string label;
    FormKind kind = FormKind::maass;
    std::int64_t level = 1;
    double spectral_parameter = 0.0;  // t_f for Maass forms, the weight k for holomorphic ones
    int sign = 1;                     // root number
    std::vector<double> coefficients;  // coefficients[n - 1] = lambda(n)
    std::vector<double> zeros;         // ordinates gamma > 0
    std::string fetched_at;

    std::int64_t n_max() const { return static_cast<std::int64_t>(coefficients.size()); }
    double lambda(std::int64_t n) const { return coefficients.at(static_cast<std::size_t>(n - 1)); }
};

bool operator==(const HeckeEigenvalueSource& a, const HeckeEigenvalueSource& b);

// Throws InvariantError on lambda(1) != 1, Hecke relation failures (1e-6) or Kim-Sarnak
// violations (Maass kind only).
void validate_source(const HeckeEigenvalueSource& s);

}  // namespace lowlying
