#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lowlying::dp {

using i64 = std::int64_t;

// ---------------------------------------------------------------------------
// Heath-Brown decomposition of the von Mangoldt function

struct HeathBrownReport {
    double max_residual = 0.0;
    i64 worst_n = 1;
    // integer part of the expansion, sum_j (-1)^{j-1} C(K, j) (1 * ... * 1 * mu_z * ... * mu_z)(n);
    // it has to coincide with mu(n) for n <= z^K
    bool integer_part_is_moebius = false;
};

inline constexpr i64 heath_brown_max_n = i64{1} << 20;

// Expands Lambda(n) for n <= n_max as K-fold convolutions with mu truncated at z and one log factor.
HeathBrownReport heath_brown_check(i64 n_max, i64 z, int K);

// ---------------------------------------------------------------------------
// dyadic tuples

inline constexpr std::size_t tuple_width = 40;

enum class CoefKind { one, moebius, log };

// Scale parameters N_j >= 1/2 stored as exponents log N_j / log N.
class DyadicTuple {
public:
    // Maass mode when weight == 0, holomorphic mode with that even weight otherwise.
    DyadicTuple(double N, double epsilon, int weight = 0);

    static DyadicTuple from_sizes(double N, double epsilon, std::span<const double> sizes,
                                  std::span<const CoefKind> kinds = {}, int weight = 0);
    // Unused slots are padded with exponent 0 (N_j = 1), the natural choice in exponent space.
    static DyadicTuple from_exponents(double N, double epsilon, std::span<const double> exponents, int weight = 0);

    double N() const { return N_; }
    double epsilon() const { return epsilon_; }
    int weight() const { return weight_; }
    bool holomorphic() const { return weight_ != 0; }

    double exponent(std::size_t j) const { return exponents_[j]; }
    double size(std::size_t j) const;
    CoefKind kind(std::size_t j) const { return kinds_[j]; }
    const std::array<double, tuple_width>& exponents() const { return exponents_; }
    double total_exponent() const;

    void set_size(std::size_t j, double size, CoefKind kind = CoefKind::one);
    void set_exponent(std::size_t j, double e, CoefKind kind = CoefKind::one);

    // Throws DomainError when the product cap or the coefficient-kind rule fails.
    void validate() const;

private:
    double N_;
    double epsilon_;
    int weight_;
    std::array<double, tuple_width> exponents_{};
    std::array<CoefKind, tuple_width> kinds_{};
};

// Powers of two N >= 1/2 whose blocks (N, 2N] meet the integers in (lo, hi].
std::vector<double> dyadic_sizes(i64 lo, i64 hi);

struct IntRange {
    i64 lo;  // exclusive
    i64 hi;  // inclusive
};

// Covers the box of integer tuples n_i in (lo_i, hi_i] by products of dyadic blocks; slots past
// ranges.size() are padded with N_j = 1/2.
std::vector<DyadicTuple> dyadic_decompose(std::span<const IntRange> ranges, double N, double epsilon);

// ---------------------------------------------------------------------------
// splitting lemmas

double theta_k(int k);

struct SplitThresholds {
    double product_cap;  // total exponent allowed, before subtracting epsilon
    double lower;        // case A: lower < sum_I
    double upper;        // case A: sum_I <= upper
    double case_b;       // case B: sum over the complement of the pair <= case_b
};

// Maass mode for weight 0, holomorphic mode otherwise.
SplitThresholds split_thresholds(double epsilon, int weight = 0);

enum class SplitCase { A, B };

struct SplitWitness {
    SplitCase which = SplitCase::B;
    std::vector<std::size_t> subset;  // case A, 0-based indices
    std::pair<std::size_t, std::size_t> pair{0, 1};  // case B
};

// Re-checks the witness against the thresholds of the tuple's mode.
bool witness_valid(const DyadicTuple& t, const SplitWitness& w);

// Greedy construction from the lemma's proof; throws InvariantError("no witness") if it fails.
SplitWitness splitting_witness(const DyadicTuple& t);
SplitWitness splitting_witness_holo(const DyadicTuple& t, int k);

// Independent search: all subsets of the slots with nonzero exponent, all pairs.
std::optional<SplitWitness> exhaustive_witness(const DyadicTuple& t);

struct ExhaustiveSummary {
    int grid = 80;
    double epsilon = 0.1;
    int max_active = 5;
    std::size_t tuples = 0;
    std::size_t greedy_failures = 0;   // "no witness" events
    std::size_t invalid_witnesses = 0;  // greedy output rejected by re-validation
    std::size_t oracle_failures = 0;    // no witness exists at all
    std::size_t case_a = 0;
    std::size_t case_b = 0;
};

// Every non-increasing tuple of at most max_active positive multiples of 1/grid with total at most
// cap - epsilon, in Maass mode (weight 0) or holomorphic mode.
ExhaustiveSummary exhaustive_split_sweep(int grid, double epsilon, int max_active = 5, int weight = 0);

struct RandomSplitSummary {
    std::uint64_t seed = 0;
    std::size_t tuples = 0;
    std::size_t greedy_failures = 0;
    std::size_t invalid_witnesses = 0;
};

// Random admissible tuples with exponents on a 1/grid lattice.
RandomSplitSummary random_split_sweep(std::size_t count, double epsilon, std::uint64_t seed, int grid = 200,
                                      int weight = 0);

// ---------------------------------------------------------------------------
// mean values of character sums

struct LargeSieveResult {
    double lhs = 0.0;
    double rhs = 0.0;
};

LargeSieveResult large_sieve_check(i64 d, std::span<const std::complex<double>> a);

struct LargeSieveSweep {
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;  // max lhs / rhs
};
LargeSieveSweep large_sieve_sweep(std::size_t trials, i64 d_max, i64 X_max, std::uint64_t seed);

struct MomentConfig {
    double t_max = 50.0;
    double panel_width = 0.5;  // Gauss-Legendre panels on [-t_max, t_max]
    double log_power = 13.0;
};

struct FourthMomentResult {
    double lhs = 0.0;
    double ratio = 0.0;       // lhs / (d (log dX)^log_power)
    double tail_bound = 0.0;  // bound for the part beyond |t| = t_max
};

FourthMomentResult fourth_moment_integral(i64 d, i64 X, CoefKind kind, const MomentConfig& cfg = {});

struct CharPolyConfig {
    double t_max = 50.0;
    double panel_width = 0.5;
    double log_power = 4.0;
};

struct CharPolyResult {
    double lhs = 0.0;
    double tail_bound = 0.0;
    double rhs_envelope = 0.0;  // ((N + d)^2 / d) N^{1/16} (log dN)^log_power
    double fitted_constant = 0.0;  // lhs / rhs_envelope
};

inline constexpr i64 char_poly_max_length = 100'000;

// Slots of size 1/2 are padding (only n = 1); at most four other slots, with prod 2N_j <= char_poly_max_length.
CharPolyResult char_poly_integral(const DyadicTuple& t, i64 d, const CharPolyConfig& cfg = {});
// int sum*_chi |prod_{j in subset} P_j(1/2 + it, chi)|^2 dt / (t^2 + 1), truncated at t_max.
double char_poly_second_moment(const DyadicTuple& t, std::span<const std::size_t> subset, i64 d,
                               const CharPolyConfig& cfg = {});

struct TailoringResult {
    double lhs = 0.0;  // (N + d)^k N^{1 - (k-1) Theta_k / 2} / d
    double rhs = 0.0;  // the three-term sum it dominates
};
TailoringResult tailoring_check(double N, double d, int k = 2);

// ---------------------------------------------------------------------------
// zero density

struct GrandDensityConfig {
    double log_power = 4.0;
    double scan_step = 0.05;
    int max_halvings = 8;
};

struct GrandDensityResult {
    i64 lhs = 0;
    double rhs = 0.0;
    i64 characters = 0;
    i64 line_count = 0;  // sum of critical-line counts, filled when beta <= 1/2
};

GrandDensityResult grand_density_ratio(i64 Q, i64 k, double T, double beta, const GrandDensityConfig& cfg = {});

}  // namespace lowlying::dp
