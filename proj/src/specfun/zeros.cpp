#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::sf {

namespace {

struct NearZero {};  // thrown when an arg walk cannot resolve a segment

double arg_ratio(cplx b, cplx a) { return std::arg(b / a); }

// Accumulated change of arg f along the segment [z0, z1].
class ArgWalker {
public:
    explicit ArgWalker(std::function<cplx(cplx)> f) : f_(std::move(f)) {}

    double segment(cplx z0, cplx z1) {
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(z1 - z0) / 0.25)));
        double total = 0.0;
        cplx za = z0;
        cplx fa = eval(za);
        for (int i = 1; i <= pieces; ++i) {
            cplx zb = z0 + (z1 - z0) * (static_cast<double>(i) / pieces);
            cplx fb = eval(zb);
            total += refine(za, fa, zb, fb, 0);
            za = zb;
            fa = fb;
        }
        return total;
    }

private:
    cplx eval(cplx z) {
        cplx v = f_(z);
        if (!(std::abs(v) > 1e-250) || !std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NearZero{};
        return v;
    }

    double refine(cplx za, cplx fa, cplx zb, cplx fb, int depth) {
        cplx zm = 0.5 * (za + zb);
        cplx fm = eval(zm);
        double whole = arg_ratio(fb, fa);
        double left = arg_ratio(fm, fa);
        double right = arg_ratio(fb, fm);
        bool ok = std::abs(whole) < std::numbers::pi / 4 && std::abs(left + right - whole) < 1e-6;
        if (ok) return left + right;
        if (depth >= 24) throw NearZero{};
        return refine(za, fa, zm, fm, depth + 1) + refine(zm, fm, zb, fb, depth + 1);
    }

    std::function<cplx(cplx)> f_;
};

void check_query(const ZeroCountQuery& q, const ZeroCountConfig& cfg) {
    if (!(q.beta >= 0.5 && q.beta <= 1.0)) throw DomainError("zero_count: beta must lie in [1/2, 1]");
    if (!(q.T > 0.0)) throw DomainError("zero_count: T must be positive");
    if (q.T > 50.0) throw DomainError("zero_count: T above 50");
    if (!q.character.is_primitive()) throw DomainError("zero_count: character must be primitive");
    if (q.character.modulus() > cfg.max_modulus) throw DomainError("zero_count: modulus above the configured maximum");
}

}  // namespace

double hardy_z(double t, const nt::DirichletCharacter& chi, const EulerMaclaurin& em) {
    const cplx rot = 1.0 / std::sqrt(root_number(chi));
    return (rot * completed_l(cplx(0.5, t), chi, em)).real();
}

ZeroCountResult critical_line_count(const nt::DirichletCharacter& chi, double T, const ZeroCountConfig& cfg) {
    if (!chi.is_primitive()) throw DomainError("critical_line_count: character must be primitive");
    const EulerMaclaurin em{cfg.em_scale, 12};
    auto steps = static_cast<std::size_t>(std::ceil(2.0 * T / cfg.scan_step));
    std::vector<double> values(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) values[i] = hardy_z(-T + 2.0 * T * static_cast<double>(i) / steps, chi, em);

    auto sign_changes = [&](std::vector<double>* zeros) {
        int count = 0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            if (values[i] * values[i + 1] < 0.0 || (values[i + 1] == 0.0 && values[i] != 0.0)) {
                ++count;
                if (zeros) zeros->push_back(-T + 2.0 * T * (static_cast<double>(i) + 0.5) / steps);
            }
        }
        return count;
    };

    std::vector<int> history{sign_changes(nullptr)};
    for (int h = 1; h <= cfg.max_halvings; ++h) {
        std::vector<double> finer(2 * steps + 1);
        for (std::size_t i = 0; i <= steps; ++i) finer[2 * i] = values[i];
        steps *= 2;
        for (std::size_t i = 1; i < steps; i += 2) finer[i] = hardy_z(-T + 2.0 * T * static_cast<double>(i) / steps, chi, em);
        values = std::move(finer);
        history.push_back(sign_changes(nullptr));
        const std::size_t n = history.size();
        if (n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3]) {
            ZeroCountResult r;
            r.line_count = history.back();
            r.final_step = 2.0 * T / steps;
            sign_changes(&r.line_zeros);
            return r;
        }
    }
    throw UnstableCountError("critical_line_count: sign-change count did not stabilize");
}

ZeroCountResult zero_count_detailed(const ZeroCountQuery& q, const ZeroCountConfig& cfg) {
    check_query(q, cfg);
    const EulerMaclaurin em{cfg.em_scale, 12};
    ZeroCountResult result;
    // L(s, chi) does not vanish on Re s >= 1, and the contour would cross the pole of zeta at s = 1
    if (q.beta >= 1.0) return result;
    const bool on_line = q.beta <= 0.5 + cfg.edge_tolerance;

    double left = q.beta;
    double top = q.T, bottom = -q.T;
    if (on_line) {
        result = critical_line_count(q.character, q.T + 2.0 * cfg.edge_shift, cfg);
        left = q.beta - cfg.edge_shift;
        // move horizontal edges away from nearby line zeros
        auto clear = [&](double edge, double dir) {
            for (double z : result.line_zeros)
                if (std::abs(z - edge) < cfg.edge_tolerance + result.final_step) return edge + dir * cfg.edge_shift;
            return edge;
        };
        top = clear(top, 1.0);
        bottom = clear(bottom, -1.0);
        std::vector<double> inside;
        for (double z : result.line_zeros)
            if (z >= bottom && z <= top) inside.push_back(z);
        result.line_zeros = std::move(inside);
        result.line_count = static_cast<int>(result.line_zeros.size());
    }

    auto f = [&](cplx s) { return completed_l(s, q.character, em); };
    // retry with perturbed edges when a zero sits on the contour
    const std::array<double, 3> offsets = {0.0, cfg.edge_shift, -cfg.edge_shift};
    std::optional<int> count;
    for (double dl : offsets) {
        for (double dt : offsets) {
            const double l = left - (on_line ? 0.0 : dl);
            const double t = top + dt, b = bottom - dt;
            const double r = cfg.right_edge;
            try {
                ArgWalker w(f);
                double total = w.segment({l, b}, {r, b}) + w.segment({r, b}, {r, t}) + w.segment({r, t}, {l, t}) +
                               w.segment({l, t}, {l, b});
                double turns = total / (2.0 * std::numbers::pi);
                double rounded = std::round(turns);
                if (std::abs(turns - rounded) > 0.1) throw UnstableCountError("zero_count: winding number is not an integer");
                count = static_cast<int>(rounded);
            } catch (const NearZero&) {
                continue;
            }
            break;
        }
        if (count) break;
    }
    if (!count) throw UnstableCountError("zero_count: contour passes through zeros after every perturbation");
    result.box_count = *count;
    if (on_line) result.line_box_disagree = result.line_count != result.box_count;
    return result;
}

int zero_count(const ZeroCountQuery& q, const ZeroCountConfig& cfg) { return zero_count_detailed(q, cfg).box_count; }

}  // namespace lowlying::sf
