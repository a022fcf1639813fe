#pragma once

// Permuted Conley-Zehnder index of symplectic paths Psi' = J0 K(t) Psi,
// Psi(0) = Id, against the permuted diagonal, by counting crossings.
// Coordinates are (p^1..p^n, q^1..q^n) and J0 = [[0, -I], [I, 0]].

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "braid_word.hpp"

namespace braidfloer {

using Matrix = Eigen::MatrixXd;

class StiffnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateCrossingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// det(Psi(tau) - sigma) = 0 for a stationary braid.
class DegenerateStationaryBraidError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Matrix standard_j(int n) {
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Matrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    return j;
}

/// Block-diagonal pair of permutation matrices; (sigma x)^k = x^{sigma(k)} in
/// both the p and the q block.
inline Matrix permuted_identity(const StrandPermutation& sigma) {
    const int n = sigma.size();
    Matrix s = Matrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        s(k, sigma(k)) = 1.0;
        s(n + k, n + sigma(k)) = 1.0;
    }
    return s;
}

struct SymmetricFamily {
    int dimension = 2;  // 2n
    std::function<Matrix(double)> at;
    bool periodic = false;
    std::string name;

    int n() const { return dimension / 2; }
    Matrix operator()(double t) const { return at(t); }

    static SymmetricFamily constant(const Matrix& k) {
        if (k.rows() != k.cols() || k.rows() % 2 != 0) throw std::invalid_argument("K must be square of even size");
        if ((k - k.transpose()).norm() > 1e-12) throw std::invalid_argument("K is not symmetric");
        return {static_cast<int>(k.rows()), [k](double) { return k; }, true, "constant"};
    }

    /// K = 2 pi k Id, generating e^{2 pi k J0 t}.
    static SymmetricFamily rotation(int k, int n = 1) {
        const Matrix m = 2.0 * std::numbers::pi * k * Matrix::Identity(2 * n, 2 * n);
        return {2 * n, [m](double) { return m; }, true, "rotation"};
    }

    /// Piecewise-linear interpolation of sampled matrices over [t0, t1].
    static SymmetricFamily table(std::vector<double> times, std::vector<Matrix> mats) {
        if (times.size() != mats.size() || times.empty()) throw std::invalid_argument("bad matrix table");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("table times must increase");
        for (const auto& m : mats)
            if (m.rows() != mats.front().rows() || m.cols() != m.rows() || m.rows() % 2 != 0 ||
                (m - m.transpose()).norm() > 1e-12)
                throw std::invalid_argument("table entries must be symmetric of equal even size");
        const int dim = static_cast<int>(mats.front().rows());
        return {dim,
                [times = std::move(times), mats = std::move(mats)](double t) -> Matrix {
                    if (t <= times.front()) return mats.front();
                    if (t >= times.back()) return mats.back();
                    const auto it = std::upper_bound(times.begin(), times.end(), t);
                    const std::size_t i = static_cast<std::size_t>(it - times.begin());
                    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                    return (1.0 - w) * mats[i - 1] + w * mats[i];
                },
                false, "table"};
    }

    /// Largest asymmetry over `samples` equally spaced times in [0, tau].
    double asymmetry(double tau, int samples = 64) const {
        double worst = 0.0;
        for (int s = 0; s <= samples; ++s) {
            const Matrix k = at(tau * s / samples);
            worst = std::max(worst, (k - k.transpose()).norm());
        }
        return worst;
    }
};

struct IntegrationOptions {
    int initial_steps = 1024;
    int max_steps = 1 << 22;
    double drift_tolerance = 1e-8;
    double accuracy_tolerance = 1e-10;  // step-doubling estimate of the global error
};

/// Psi on an equally spaced grid over [t0, t1].
struct SymplecticPathSample {
    SymmetricFamily family;
    double t0 = 0.0, t1 = 1.0;
    std::vector<double> times;
    std::vector<Matrix> psi;
    int steps = 0;
    int halvings = 0;
    double max_drift = 0.0;

    int n() const { return family.n(); }
    double step() const { return (t1 - t0) / steps; }

    /// Psi at any time, one short RK4 step from the nearest sample below.
    Matrix at(double t) const;
};

namespace detail {

inline Matrix rk4_step(const SymmetricFamily& k, const Matrix& j0, double t, const Matrix& y, double h) {
    auto f = [&](double s, const Matrix& x) -> Matrix { return j0 * k(s) * x; };
    const Matrix a = f(t, y);
    const Matrix b = f(t + h / 2, y + h / 2 * a);
    const Matrix c = f(t + h / 2, y + h / 2 * b);
    const Matrix d = f(t + h, y + h * c);
    return y + h / 6 * (a + 2 * b + 2 * c + d);
}

inline double drift(const Matrix& psi, const Matrix& j0) { return (psi.transpose() * j0 * psi - j0).norm(); }

}  // namespace detail

inline Matrix SymplecticPathSample::at(double t) const {
    if (t <= t0) return psi.front();
    if (t >= t1) return psi.back();
    const double h = step();
    std::size_t j = static_cast<std::size_t>(std::floor((t - t0) / h));
    j = std::min(j, psi.size() - 1);
    const double dt = t - times[j];
    if (dt == 0.0) return psi[j];
    return detail::rk4_step(family, standard_j(n()), times[j], psi[j], dt);
}

namespace detail {

inline SymplecticPathSample rk4_grid(const SymmetricFamily& k, double t0, double t1, const Matrix& psi0, int steps) {
    const Matrix j0 = standard_j(k.n());
    SymplecticPathSample out;
    out.family = k;
    out.t0 = t0;
    out.t1 = t1;
    out.steps = steps;
    const double h = (t1 - t0) / steps;
    out.times.reserve(static_cast<std::size_t>(steps) + 1);
    out.psi.reserve(static_cast<std::size_t>(steps) + 1);
    Matrix y = psi0;
    out.times.push_back(t0);
    out.psi.push_back(y);
    double worst = drift(y, j0);
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        const Matrix kt = k(t);
        if ((kt - kt.transpose()).norm() > 1e-12) throw std::invalid_argument("K(t) is not symmetric");
        y = rk4_step(k, j0, t, y, h);
        out.times.push_back(s + 1 == steps ? t1 : t0 + (s + 1) * h);
        out.psi.push_back(y);
        worst = std::max(worst, drift(y, j0));
    }
    out.max_drift = worst;
    return out;
}

}  // namespace detail

/// Classical RK4 from Psi(t0) = psi0, halving the step until the symplectic
/// drift stays below its bound and a step-doubling comparison agrees.
inline SymplecticPathSample integrate_segment(const SymmetricFamily& k, double t0, double t1, const Matrix& psi0,
                                              const IntegrationOptions& opt = {}) {
    if (!(t1 > t0)) throw std::invalid_argument("empty integration interval");
    if (k.dimension % 2 != 0 || k.dimension < 2) throw std::invalid_argument("family dimension must be even");
    int steps = opt.initial_steps;
    int halvings = 0;
    SymplecticPathSample coarse = detail::rk4_grid(k, t0, t1, psi0, steps);
    for (;;) {
        if (steps >= opt.max_steps) throw StiffnessError("symplectic drift bound unreachable at minimum step");
        SymplecticPathSample fine = detail::rk4_grid(k, t0, t1, psi0, 2 * steps);
        ++halvings;
        double err = 0.0;
        for (std::size_t j = 0; j < coarse.psi.size(); ++j) err = std::max(err, (coarse.psi[j] - fine.psi[2 * j]).norm());
        steps *= 2;
        if (fine.max_drift < opt.drift_tolerance && err < opt.accuracy_tolerance) {
            fine.halvings = halvings;
            return fine;
        }
        coarse = std::move(fine);
    }
}

inline SymplecticPathSample integrate_path(const SymmetricFamily& k, double tau, const IntegrationOptions& opt = {}) {
    return integrate_segment(k, 0.0, tau, Matrix::Identity(k.dimension, k.dimension), opt);
}

struct CrossingRecord {
    double time = 0.0;
    Matrix kernel;  // columns span ker(Psi(t) - sigma)
    Matrix form;    // crossing form on the kernel
    int signature = 0;
    bool endpoint = false;
};

/// Index stored doubled so that half-integers are exact.
struct MaslovIndex {
    int twice_value = 0;
    std::vector<CrossingRecord> crossings;
    bool start_degenerate = false;  // Psi(t0) - sigma singular
    bool end_degenerate = false;    // Psi(t1) - sigma singular

    double value() const { return twice_value / 2.0; }
    bool integral() const { return twice_value % 2 == 0; }
};

struct CrossingOptions {
    double kernel_tolerance = 1e-8;  // singular values below this are zero
    double form_tolerance = 1e-8;    // smaller eigenvalues of the form are degenerate
    double time_resolution = 1e-12;
    double min_separation = 1e-6;
    int max_refinements = 4;
};

namespace detail {

inline double smallest_singular(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().minCoeff();
}

inline CrossingRecord crossing_at(const SymplecticPathSample& path, const Matrix& sbar, double t, const CrossingOptions& opt) {
    CrossingRecord rec;
    rec.time = t;
    const Matrix m = path.at(t) - sbar;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<int> cols;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) < opt.kernel_tolerance) cols.push_back(i);
    rec.kernel = Matrix(m.cols(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) rec.kernel.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(cols[c]);
    const Matrix sx = sbar * rec.kernel;
    rec.form = sx.transpose() * path.family(t) * sx;
    rec.form = 0.5 * (rec.form + rec.form.transpose());
    if (rec.form.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rec.form);
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const double ev = es.eigenvalues()(i);
            if (std::abs(ev) < opt.form_tolerance)
                throw DegenerateCrossingError("degenerate crossing form at t = " + std::to_string(t));
            rec.signature += ev > 0 ? 1 : -1;
        }
    }
    return rec;
}

inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline int det_sign(const Matrix& m) {
    const double d = m.determinant();
    return (d > 0) - (d < 0);
}

// Interior crossing times of one sampled path; empty optional when the
// sampling looks too coarse to separate them.
inline std::optional<std::vector<CrossingRecord>> interior_crossings(const SymplecticPathSample& path, const Matrix& sbar,
                                                                    const CrossingOptions& opt) {
    const std::size_t count = path.psi.size();
    std::vector<double> smin(count);
    std::vector<int> sign(count);
    for (std::size_t j = 0; j < count; ++j) {
        const Matrix m = path.psi[j] - sbar;
        smin[j] = smallest_singular(m);
        sign[j] = det_sign(m);
    }
    auto smin_at = [&](double t) { return smallest_singular(path.at(t) - sbar); };
    const double h = path.step();
    const double edge = 1e-9 * std::max(1.0, path.t1 - path.t0);

    std::vector<double> found;
    auto consider = [&](double t) {
        if (t <= path.t0 + edge || t >= path.t1 - edge) return;
        if (smin_at(t) >= opt.kernel_tolerance) return;
        for (double f : found)
            if (std::abs(f - t) < 1e-9) return;
        found.push_back(t);
    };
    // local minima of the smallest singular value catch every crossing,
    // including those of even kernel dimension where det does not change sign
    for (std::size_t j = 1; j + 1 < count; ++j)
        if (smin[j] <= smin[j - 1] && smin[j] <= smin[j + 1])
            consider(golden_min(smin_at, path.times[j - 1], path.times[j + 1], opt.time_resolution));
    // det sign changes next to the ends, where no interior minimum exists
    for (std::size_t j = 0; j + 1 < count; ++j) {
        if (sign[j] == 0 || sign[j + 1] == 0 || sign[j] == sign[j + 1]) continue;
        double a = path.times[j], b = path.times[j + 1];
        const int sa = sign[j];
        while (b - a > opt.time_resolution) {
            const double mid = 0.5 * (a + b);
            const int sm = det_sign(path.at(mid) - sbar);
            if (sm == sa) a = mid;
            else b = mid;
        }
        consider(0.5 * (a + b));
    }
    std::sort(found.begin(), found.end());
    for (std::size_t i = 1; i < found.size(); ++i)
        if (found[i] - found[i - 1] < opt.min_separation) return std::nullopt;

    std::vector<CrossingRecord> out;
    for (double t : found) out.push_back(crossing_at(path, sbar, t, opt));

    // parity bookkeeping between samples that are clearly off the crossings
    const double clean = std::max(1e-6, 1e3 * opt.kernel_tolerance);
    std::size_t last = 0;
    while (last < count && smin[last] < clean) ++last;
    for (std::size_t j = last + 1; j < count; ++j) {
        if (smin[j] < clean) continue;
        int dims = 0;
        for (const auto& c : out)
            if (c.time > path.times[last] && c.time < path.times[j]) dims += static_cast<int>(c.kernel.cols());
        if (((sign[last] != sign[j]) ? 1 : 0) != dims % 2) return std::nullopt;
        last = j;
    }
    (void)h;
    return out;
}

}  // namespace detail

/// mu_sigma of the sampled path on [t0, t1], endpoints with half weight.
/// A singular endpoint is recorded, not rejected.
inline MaslovIndex permuted_cz_index(const SymplecticPathSample& path, const StrandPermutation& sigma,
                                     const CrossingOptions& opt = {}) {
    if (sigma.size() != path.n()) throw std::invalid_argument("permutation size does not match the path");
    const Matrix sbar = permuted_identity(sigma);
    SymplecticPathSample current = path;
    std::optional<std::vector<CrossingRecord>> interior;
    for (int attempt = 0;; ++attempt) {
        interior = detail::interior_crossings(current, sbar, opt);
        if (interior) break;
        if (attempt >= opt.max_refinements) throw DegenerateCrossingError("crossings could not be separated");
        IntegrationOptions io;
        io.initial_steps = current.steps * 2;
        current = integrate_segment(current.family, current.t0, current.t1, current.psi.front(), io);
    }
    MaslovIndex idx;
    for (auto& c : *interior) {
        idx.twice_value += 2 * c.signature;
        idx.crossings.push_back(std::move(c));
    }
    auto endpoint = [&](double t, bool& flag) {
        if (detail::smallest_singular(current.at(t) - sbar) >= opt.kernel_tolerance) return;
        flag = true;
        CrossingRecord c = detail::crossing_at(current, sbar, t, opt);
        c.endpoint = true;
        idx.twice_value += c.signature;
        idx.crossings.push_back(std::move(c));
    };
    endpoint(current.t0, idx.start_degenerate);
    endpoint(current.t1, idx.end_degenerate);
    std::sort(idx.crossings.begin(), idx.crossings.end(), [](const CrossingRecord& a, const CrossingRecord& b) { return a.time < b.time; });
    return idx;
}

/// Index of a stationary braid: the endpoint must not be a crossing.
inline MaslovIndex stationary_braid_index(const SymmetricFamily& k, const StrandPermutation& sigma, double tau = 1.0,
                                          const CrossingOptions& opt = {}) {
    const auto path = integrate_path(k, tau);
    const auto idx = permuted_cz_index(path, sigma, opt);
    if (idx.end_degenerate) throw DegenerateStationaryBraidError("stationary braid degenerate: det(Psi(tau) - sigma) = 0");
    return idx;
}

/// K_k(t) = (2 pi k / tau) Id + Phi_k K Phi_k^T generates Phi_k Psi, with
/// Phi_k(t) = exp(2 pi k J0 t / tau).
inline SymmetricFamily rotated_family(const SymmetricFamily& k, int turns, double tau) {
    const int dim = k.dimension;
    const Matrix j0 = standard_j(dim / 2);
    const double w = 2.0 * std::numbers::pi * turns / tau;
    SymmetricFamily out;
    out.dimension = dim;
    out.periodic = k.periodic;
    out.name = k.name + "+rotation";
    out.at = [k, j0, w, dim](double t) -> Matrix {
        // exp(w t J0) = cos(w t) Id + sin(w t) J0 since J0^2 = -Id
        const Matrix phi = std::cos(w * t) * Matrix::Identity(dim, dim) + std::sin(w * t) * j0;
        Matrix r = w * Matrix::Identity(dim, dim) + phi * k(t) * phi.transpose();
        return 0.5 * (r + r.transpose());
    };
    return out;
}

/// Checks mu(Phi_k Psi) = mu(Psi) + 2 k n exactly.
inline bool rotation_shift_check(const SymplecticPathSample& path, const StrandPermutation& sigma, int k,
                                 const CrossingOptions& opt = {}) {
    if (k == 0) return true;
    if (path.t0 != 0.0) throw std::invalid_argument("rotation shift needs a path starting at 0");
    const MaslovIndex base = permuted_cz_index(path, sigma, opt);
    const double tau = path.t1;
    const auto rotated = integrate_path(rotated_family(path.family, k, tau), tau);
    const MaslovIndex shifted = permuted_cz_index(rotated, sigma, opt);
    return shifted.twice_value == base.twice_value + 2 * (2 * k * path.n());
}

// ---------------------------------------------------------------------------
// Annulus model H = F(|x|) + phi_delta(|x|) G(arg x), G = eps cos(theta),
// in symplectic polar coordinates (I, theta), I = |x|^2 / 2.

struct AnnulusParams {
    double r1 = 0.05;   // inner radius of the annulus
    double r2 = 0.95;   // outer radius
    double delta = 0.05;
    double epsilon = 0.1;
    bool positive = true;  // boundary twist condition: + or -
};

struct AnnulusCriticalPoint {
    double action = 0.0;  // I
    double angle = 0.0;   // theta
    Matrix hessian;       // linearization of the gradient in (I, theta)
};

struct AnnulusModel {
    AnnulusParams params;
    std::function<double(double)> f, df;     // F and F'
    std::function<double(double)> cutoff, dcutoff;
    std::vector<AnnulusCriticalPoint> critical_points;
    bool degenerate_circle = false;  // eps = 0: a whole circle of equilibria

    /// Gradient (I-component, theta-component) as in the polar Cauchy-Riemann system.
    Eigen::Vector2d gradient(double action, double angle) const {
        const double r = std::sqrt(2.0 * action);
        const double eps = params.epsilon;
        Eigen::Vector2d g;
        g(0) = r * df(r) + eps * r * dcutoff(r) * std::cos(angle);
        g(1) = -eps / (2.0 * action) * cutoff(r) * std::sin(angle);
        return g;
    }

    Matrix linearization(double action, double angle) const {
        const double h = 1e-5;
        Matrix m(2, 2);
        // fourth-order central differences
        auto col = [&](double di, double dt) -> Eigen::Vector2d {
            return (-gradient(action + 2 * di, angle + 2 * dt) + 8 * gradient(action + di, angle + dt) -
                    8 * gradient(action - di, angle - dt) + gradient(action - 2 * di, angle - 2 * dt)) /
                   (12 * h);
        };
        m.col(0) = col(h, 0);
        m.col(1) = col(0, h);
        return 0.5 * (m + m.transpose());
    }

    SymmetricFamily family_at(std::size_t i) const { return SymmetricFamily::constant(critical_points.at(i).hessian); }
};

inline AnnulusModel annulus_hamiltonian(const AnnulusParams& p) {
    if (!(0 < p.r1 && p.r1 < p.r2 && p.r2 <= 1.0)) throw std::invalid_argument("annulus radii must satisfy 0 < r1 < r2 <= 1");
    if (!(p.delta > 0 && p.delta < 0.25)) throw std::invalid_argument("delta must lie in (0, 1/4)");
    if (!(p.epsilon >= 0 && p.epsilon < 1.0 / (4.0 * p.delta) - 1.0))
        throw std::invalid_argument("epsilon must satisfy 0 < epsilon < 1/(4 delta) - 1");
    AnnulusModel m;
    m.params = p;
    const double s = p.positive ? 1.0 : -1.0;
    const double d = p.delta;
    m.f = [s, d](double r) { return s * (0.5 * (r - 0.5) * (r - 0.5) - 0.5 * (d - 0.5) * (d - 0.5)); };
    m.df = [s](double r) { return s * (r - 0.5); };
    // smooth step: 0 for r <= delta and r >= 1 - delta, 1 on [2 delta, 1 - 2 delta]
    auto step = [](double x) {
        auto e = [](double y) { return y > 0 ? std::exp(-1.0 / y) : 0.0; };
        return e(x) / (e(x) + e(1.0 - x));
    };
    auto dstep = [step](double x) {
        const double h = 1e-6;
        return (step(x + h) - step(x - h)) / (2 * h);
    };
    m.cutoff = [step, d](double r) { return step((r - d) / d) * step((1.0 - d - r) / d); };
    m.dcutoff = [step, dstep, d](double r) {
        return dstep((r - d) / d) / d * step((1.0 - d - r) / d) - step((r - d) / d) * dstep((1.0 - d - r) / d) / d;
    };
    if (p.epsilon == 0.0) {
        m.degenerate_circle = true;
        return m;
    }
    for (double angle : {0.0, std::numbers::pi}) {
        // Newton in I on the first component; the second vanishes at sin = 0
        double action = 0.125;
        for (int it = 0; it < 50; ++it) {
            const double g = m.gradient(action, angle)(0);
            const double dg = m.linearization(action, angle)(0, 0);
            const double next = action - g / dg;
            if (std::abs(next - action) < 1e-15) break;
            action = next;
        }
        const Matrix hess = m.linearization(action, angle);
        Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
        if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-9) m.degenerate_circle = true;
        m.critical_points.push_back({action, angle, hess});
    }
    return m;
}

/// 1 minus the number of negative eigenvalues, valid for ||K|| < 2 pi.
inline int morse_relation_index(const Matrix& k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    int neg = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < 0) ++neg;
    return static_cast<int>(k.rows()) / 2 - neg;
}

}  // namespace braidfloer
