// Copyright 2026 The contextcalc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "contextcalc/ontomodels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "contextcalc/errors.hpp"
#include "contextcalc/kernels.hpp"
#include "contextcalc/lp.hpp"

namespace contextcalc::ontomodels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitTol = 1e-9;
constexpr double kModelTol = 1e-12;

BlochVector cross(const BlochVector &a, const BlochVector &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

BlochVector normalized(const BlochVector &v) { return v * (1.0 / v.norm()); }

BlochVector any_perpendicular(const BlochVector &a) {
    BlochVector t = std::abs(a.x) < 0.9 ? BlochVector{1.0, 0.0, 0.0} : BlochVector{0.0, 1.0, 0.0};
    return normalized(cross(a, t));
}

// Gauss-Legendre nodes and weights mapped to [a, b], by Newton iteration on
// the three-term recurrence. (GSL's glfixed is only accurate to ~1e-11 for
// orders it does not tabulate.)
void gauss_legendre(std::size_t n, double a, double b, std::vector<double> &x, std::vector<double> &w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                double dk = static_cast<double>(k);
                p0 = ((2.0 * dk - 1.0) * z * p1 - (dk - 1.0) * p2) / dk;
            }
            dp = dn * (z * p0 - p1) / (z * z - 1.0);
            double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = w[n - 1 - i] = half * wi;
    }
}

// Fixed spread of directions used to measure product-grid error.
std::vector<BlochVector> probe_axes(std::size_t count) {
    std::vector<BlochVector> out;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
        double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
        double r = std::sqrt(1.0 - z * z);
        double phi = golden * static_cast<double>(i);
        out.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return out;
}

double ks_value(const BlochVector &n, const BlochVector &s) {
    double c = n.dot(s);
    return 4.0 * c * heaviside(c);
}

void require_unit(const BlochVector &v, const char *what) {
    if (std::abs(v.norm() - 1.0) > kUnitTol) {
        throw ContractError(std::string(what) + ": direction must be a unit vector");
    }
}

void require_same_grid(const OnticDensity &a, const OnticDensity &b) {
    if (!a.grid || a.grid != b.grid || a.values.size() != b.values.size()) {
        throw ContractError("model_total_variation: densities live on different grids");
    }
}

void require_p(double p) {
    if (!(p >= 0.5 && p <= 1.0)) {
        throw ContractError("noisy PNC model: p must lie in [1/2, 1]");
    }
}

}  // namespace

std::string to_string(GridKind k) {
    switch (k) {
        case GridKind::Product:
            return "product-gauss";
        case GridKind::Uniform:
            return "uniform-mc";
        case GridKind::Adapted:
            return "adapted";
    }
    return "unknown";
}

GridPtr SphereGrid::product(std::size_t polar, std::size_t azimuthal) {
    if (polar < 8 || polar % 2 != 0 || azimuthal < 8) {
        throw ContractError("SphereGrid::product: polar order must be even and >= 8, azimuthal >= 8");
    }
    std::shared_ptr<SphereGrid> g(new SphereGrid());
    g->kind_ = GridKind::Product;
    std::vector<double> u;
    std::vector<double> wu;
    std::vector<double> u2;
    std::vector<double> wu2;
    gauss_legendre(polar / 2, -1.0, 0.0, u, wu);
    gauss_legendre(polar / 2, 0.0, 1.0, u2, wu2);
    u.insert(u.end(), u2.begin(), u2.end());
    wu.insert(wu.end(), wu2.begin(), wu2.end());
    g->nodes_.reserve(polar * azimuthal);
    g->weights_.reserve(polar * azimuthal);
    for (std::size_t i = 0; i < polar; ++i) {
        double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
        for (std::size_t j = 0; j < azimuthal; ++j) {
            double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(azimuthal);
            g->nodes_.push_back({s * std::cos(phi), s * std::sin(phi), u[i]});
            g->weights_.push_back(wu[i] / 2.0 / static_cast<double>(azimuthal));
        }
    }
    // Error on KS normalization and Born integrals along probe directions.
    double err = 0.0;
    auto axes = probe_axes(16);
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const auto &a = axes[i];
        const auto &b = axes[(i + 5) % axes.size()];
        double norm = g->integrate([&](const BlochVector &n) { return ks_value(n, a); });
        double born = g->integrate([&](const BlochVector &n) { return ks_value(n, a) * heaviside(n.dot(b)); });
        err = std::max({err, std::abs(norm - 1.0), std::abs(born - (1.0 + a.dot(b)) / 2.0)});
    }
    // Responses whose edge runs through the poles cut every ring at the same
    // phase, so the ring errors add up; probe those at several offsets.
    const double step = 2.0 * kPi / static_cast<double>(azimuthal);
    for (std::size_t i = 0; i < axes.size(); ++i) {
        double phi = step * (static_cast<double>(7 * i) + 0.125 * static_cast<double>(i % 8));
        BlochVector b{std::cos(phi), std::sin(phi), 0.0};
        const auto &a = axes[i];
        double born = g->integrate([&](const BlochVector &n) { return ks_value(n, a) * heaviside(n.dot(b)); });
        err = std::max(err, std::abs(born - (1.0 + a.dot(b)) / 2.0));
    }
    g->tolerance_ = std::max(2.0 * err, 1e-12);
    return g;
}

GridPtr SphereGrid::uniform(std::size_t size, std::uint64_t seed) {
    if (size == 0) {
        throw ContractError("SphereGrid::uniform: size must be positive");
    }
    std::shared_ptr<SphereGrid> g(new SphereGrid());
    g->kind_ = GridKind::Uniform;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    g->nodes_.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        BlochVector v;
        do {
            v = {normal(rng), normal(rng), normal(rng)};
        } while (v.norm() < 1e-12);
        g->nodes_.push_back(normalized(v));
    }
    g->weights_.assign(size, 1.0 / static_cast<double>(size));
    // Standard deviation of 4 (n.a) Theta(n.a) under the uniform measure is sqrt(5/3).
    g->tolerance_ = 3.0 * std::sqrt(5.0 / 3.0 / static_cast<double>(size));
    return g;
}

GridPtr SphereGrid::adapted(const std::vector<BlochVector> &normals, std::size_t order) {
    if (order < 8) {
        throw ContractError("SphereGrid::adapted: order must be >= 8");
    }
    std::vector<BlochVector> dirs;
    for (const auto &v : normals) {
        if (v.norm() > 1e-12) {
            dirs.push_back(normalized(v));
        }
    }
    if (dirs.empty()) {
        dirs.push_back({0.0, 0.0, 1.0});
    }
    BlochVector pole = any_perpendicular(dirs.front());
    for (std::size_t i = 1; i < dirs.size(); ++i) {
        BlochVector c = cross(dirs.front(), dirs[i]);
        if (c.norm() > 1e-9) {
            pole = normalized(c);
            break;
        }
    }
    for (const auto &d : dirs) {
        if (std::abs(d.dot(pole)) > 1e-9) {
            throw ContractError("SphereGrid::adapted: great circles do not share a common axis");
        }
    }
    BlochVector ex = dirs.front();
    BlochVector ey = cross(pole, ex);

    std::vector<double> cuts;
    for (const auto &d : dirs) {
        double a = std::atan2(d.dot(ey), d.dot(ex));
        for (double c : {a + kPi / 2.0, a - kPi / 2.0}) {
            cuts.push_back(std::fmod(c + 4.0 * kPi, 2.0 * kPi));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> uniq;
    for (double c : cuts) {
        if (uniq.empty() || c - uniq.back() > 1e-13) {
            uniq.push_back(c);
        }
    }
    if (uniq.size() > 1 && uniq.front() + 2.0 * kPi - uniq.back() <= 1e-13) {
        uniq.pop_back();
    }
    uniq.push_back(uniq.front() + 2.0 * kPi);

    std::vector<double> th;
    std::vector<double> wth;
    gauss_legendre(order, 0.0, kPi, th, wth);
    std::vector<double> phi;
    std::vector<double> wphi;
    for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
        double arc = uniq[k + 1] - uniq[k];
        auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(order) * arc / kPi));
        std::vector<double> x;
        std::vector<double> w;
        gauss_legendre(std::max<std::size_t>(m, 8), uniq[k], uniq[k + 1], x, w);
        phi.insert(phi.end(), x.begin(), x.end());
        wphi.insert(wphi.end(), w.begin(), w.end());
    }

    std::shared_ptr<SphereGrid> g(new SphereGrid());
    g->kind_ = GridKind::Adapted;
    g->nodes_.reserve(th.size() * phi.size());
    g->weights_.reserve(th.size() * phi.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
        double st = std::sin(th[i]);
        double ct = std::cos(th[i]);
        for (std::size_t j = 0; j < phi.size(); ++j) {
            g->nodes_.push_back((ex * std::cos(phi[j]) + ey * std::sin(phi[j])) * st + pole * ct);
            g->weights_.push_back(wth[i] * st / 2.0 * wphi[j] / (2.0 * kPi));
        }
    }
    g->tolerance_ = 1e-12;
    return g;
}

double SphereGrid::integrate(const std::function<double(const BlochVector &)> &f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        s += weights_[i] * f(nodes_[i]);
    }
    return s;
}

double OnticDensity::total() const {
    if (!grid) {
        throw ContractError("OnticDensity: no grid");
    }
    std::vector<double> ones(values.size(), 1.0);
    return kernels::weighted_dot_parallel(grid->weights(), values, ones);
}

BlochVector pure_qubit_direction(const DensityOperator &psi) {
    if (psi.dim() != 2) {
        throw ContractError("ontological models: qubit input required");
    }
    BlochVector s = qmath::bloch_vector(psi);
    if (std::abs(s.norm() - 1.0) > kUnitTol) {
        throw ContractError("ontological models: pure state required");
    }
    return normalized(s);
}

OnticDensity ks_density(const GridPtr &grid, const BlochVector &s) {
    require_unit(s, "ks_density");
    OnticDensity d{grid, std::vector<double>(grid->size())};
    const auto &nodes = grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        d.values[i] = ks_value(nodes[i], s);
    }
    return d;
}

std::vector<double> ks_response(const GridPtr &grid, const BlochVector &r) {
    require_unit(r, "ks_response");
    std::vector<double> out(grid->size());
    const auto &nodes = grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out[i] = heaviside(nodes[i].dot(r));
    }
    return out;
}

KsEvaluation ks_model_eval(const GridPtr &grid, const DensityOperator &psi, const DensityOperator &phi) {
    BlochVector s = pure_qubit_direction(psi);
    BlochVector r = pure_qubit_direction(phi);
    KsEvaluation e{ks_density(grid, s), ks_response(grid, r), 0.0};
    e.born = kernels::weighted_dot_parallel(grid->weights(), e.density.values, e.response);
    return e;
}

KsEvaluation ks_model_eval(const DensityOperator &psi, const DensityOperator &phi, std::size_t order) {
    auto grid = SphereGrid::adapted({pure_qubit_direction(psi), pure_qubit_direction(phi)}, order);
    return ks_model_eval(grid, psi, phi);
}

double ks_born(const GridPtr &grid, const BlochVector &s, const BlochVector &r) {
    const auto &nodes = grid->nodes();
    const auto &w = grid->weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        sum += w[i] * ks_value(nodes[i], s) * heaviside(nodes[i].dot(r));
    }
    return sum;
}

double ks_born(const BlochVector &s, const BlochVector &r, std::size_t order) {
    require_unit(s, "ks_born");
    require_unit(r, "ks_born");
    return ks_born(SphereGrid::adapted({s, r}, order), s, r);
}

std::vector<double> ks_born_batch_serial(const GridPtr &grid,
                                         const std::vector<std::pair<BlochVector, BlochVector>> &pairs) {
    std::vector<double> out(pairs.size());
    kernels::for_each_serial(pairs.size(),
                             [&](std::size_t i) { out[i] = ks_born(grid, pairs[i].first, pairs[i].second); });
    return out;
}

std::vector<double> ks_born_batch_parallel(const GridPtr &grid,
                                           const std::vector<std::pair<BlochVector, BlochVector>> &pairs) {
    std::vector<double> out(pairs.size());
    kernels::for_each_parallel(pairs.size(),
                               [&](std::size_t i) { out[i] = ks_born(grid, pairs[i].first, pairs[i].second); });
    return out;
}

double model_total_variation(const OnticDensity &a, const OnticDensity &b) {
    require_same_grid(a, b);
    return 0.5 * kernels::weighted_l1_parallel(a.grid->weights(), a.values, b.values);
}

BlochVector ensemble_average(const Ensemble &ensemble) {
    BlochVector a;
    for (const auto &e : ensemble) {
        a = a + e.direction * e.weight;
    }
    return a;
}

Ensemble random_ensemble_with_average(const BlochVector &a, std::size_t k, std::mt19937_64 &rng) {
    if (k < 2 || !(a.norm() < 1.0)) {
        throw ContractError("random_ensemble_with_average: need k >= 2 and |a| < 1");
    }
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(1.0);
    std::vector<BlochVector> dirs;
    std::vector<double> rel(k - 1);
    double rsum = 0.0;
    for (auto &r : rel) {
        r = expo(rng);
        rsum += r;
    }
    BlochVector c;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        BlochVector v;
        do {
            v = {normal(rng), normal(rng), normal(rng)};
        } while (v.norm() < 1e-12);
        dirs.push_back(normalized(v));
        rel[i] /= rsum;
        c = c + dirs.back() * rel[i];
    }
    double cc = c.dot(c);
    double ac = a.dot(c);
    double aa = a.dot(a);
    double t;
    if (std::abs(cc - 1.0) < 1e-12) {
        t = (1.0 - aa) / (2.0 * (1.0 - ac));
    } else {
        // (cc - 1) t^2 + 2 (1 - ac) t + (aa - 1) = 0 has exactly one root in [0, 1].
        double qa = cc - 1.0;
        double qb = 2.0 * (1.0 - ac);
        double qc = aa - 1.0;
        double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
        t = (-qb + disc) / (2.0 * qa);
        if (!(t >= 0.0 && t <= 1.0)) {
            t = (-qb - disc) / (2.0 * qa);
        }
    }
    Ensemble e;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        e.push_back({t * rel[i], dirs[i]});
    }
    BlochVector last = a - c * t;
    e.push_back({1.0 - t, normalized(last)});
    return e;
}

OnticDensity ks_ensemble_density(const GridPtr &grid, const Ensemble &ensemble) {
    if (ensemble.empty()) {
        throw ContractError("ks_ensemble_density: empty ensemble");
    }
    double total = 0.0;
    for (const auto &e : ensemble) {
        if (e.weight < 0.0) {
            throw ContractError("ks_ensemble_density: negative weight");
        }
        require_unit(e.direction, "ks_ensemble_density");
        total += e.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ContractError("ks_ensemble_density: weights must sum to 1");
    }
    BlochVector a = ensemble_average(ensemble);
    OnticDensity d{grid, std::vector<double>(grid->size(), 0.0)};
    const auto &nodes = grid->nodes();
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double sum = 0.0;
        double abs_part = 0.0;
        for (const auto &e : ensemble) {
            sum += e.weight * ks_value(nodes[i], e.direction);
            abs_part += e.weight * std::abs(nodes[i].dot(e.direction));
        }
        double closed = 2.0 * (nodes[i].dot(a) + abs_part);
        worst = std::max(worst, std::abs(sum - closed));
        d.values[i] = sum;
    }
    if (worst > 1e-10) {
        std::ostringstream msg;
        msg << "ks_ensemble_density: convex sum and closed form differ by " << worst;
        throw NumericalError(msg.str());
    }
    return d;
}

double ks_pair_total_variation(const BlochVector &a, const BlochVector &b, std::size_t order) {
    require_unit(a, "ks_pair_total_variation");
    require_unit(b, "ks_pair_total_variation");
    auto grid = SphereGrid::adapted({a, b, a - b}, order);
    return model_total_variation(ks_density(grid, a), ks_density(grid, b));
}

QuadratureCheck ks_ensemble_total_variation(const GridPtr &grid, const Ensemble &a, const Ensemble &b,
                                            std::size_t mc_samples, std::uint64_t seed) {
    QuadratureCheck q;
    q.value = model_total_variation(ks_ensemble_density(grid, a), ks_ensemble_density(grid, b));
    q.error_estimate = grid->tolerance();
    if (mc_samples > 0) {
        auto mc = SphereGrid::uniform(mc_samples, seed);
        auto da = ks_ensemble_density(mc, a);
        auto db = ks_ensemble_density(mc, b);
        kernels::Welford w;
        for (std::size_t i = 0; i < mc_samples; ++i) {
            w.add(0.5 * std::abs(da.values[i] - db.values[i]));
        }
        auto est = kernels::finish(w);
        q.mc_value = est.mean;
        q.mc_std_err = est.std_err;
        q.error_estimate = std::max({q.error_estimate, std::abs(q.value - q.mc_value), 3.0 * q.mc_std_err});
    }
    return q;
}

OnticDensity noisy_pnc_density(const GridPtr &grid, double p, const BlochVector &s) {
    require_p(p);
    require_unit(s, "noisy_pnc_density");
    OnticDensity d{grid, std::vector<double>(grid->size())};
    const auto &nodes = grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        d.values[i] = 2.0 * (1.0 - p) * (nodes[i].dot(s) + 1.0) + (2.0 * p - 1.0);
    }
    return d;
}

double noisy_pnc_model_eval(const GridPtr &grid, double p, const DensityOperator &psi, const DensityOperator &phi) {
    auto mu = noisy_pnc_density(grid, p, pure_qubit_direction(psi));
    auto xi = ks_response(grid, pure_qubit_direction(phi));
    return kernels::weighted_dot_parallel(grid->weights(), mu.values, xi);
}

double noisy_pnc_model_eval(double p, const DensityOperator &psi, const DensityOperator &phi, std::size_t order) {
    require_p(p);
    auto grid = SphereGrid::adapted({pure_qubit_direction(phi)}, order);
    return noisy_pnc_model_eval(grid, p, psi, phi);
}

DiscreteModel::DiscreteModel(std::vector<std::string> ontic_labels, std::map<std::string, std::vector<double>> mu,
                             std::vector<ModelMeasurement> measurements)
    : ontic_(std::move(ontic_labels)), mu_(std::move(mu)), measurements_(std::move(measurements)) {
    std::set<std::string> seen;
    for (const auto &l : ontic_) {
        if (!seen.insert(l).second) {
            throw ValidationError("duplicate-label", "ontic state '" + l + "'", "duplicate label");
        }
    }
    const std::size_t n = ontic_.size();
    for (const auto &[label, row] : mu_) {
        if (row.size() != n) {
            throw ValidationError("shape", "mu '" + label + "'", "expected one weight per ontic state");
        }
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0 + kModelTol)) {
                throw ValidationError("probability-range", "mu '" + label + "'", "weight outside [0, 1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kModelTol) {
            std::ostringstream msg;
            msg << "weights sum to " << sum;
            throw ValidationError("row-sum", "mu '" + label + "'", msg.str());
        }
    }
    std::set<std::string> meas_seen;
    for (const auto &m : measurements_) {
        if (!meas_seen.insert(m.label).second) {
            throw ValidationError("duplicate-label", "measurement '" + m.label + "'", "duplicate label");
        }
        if (m.xi.size() != m.outcomes.size() || m.outcomes.empty()) {
            throw ValidationError("shape", "measurement '" + m.label + "'", "one response row per outcome");
        }
        for (const auto &row : m.xi) {
            if (row.size() != n) {
                throw ValidationError("shape", "measurement '" + m.label + "'", "expected one entry per ontic state");
            }
            for (double v : row) {
                if (!(v >= 0.0 && v <= 1.0 + kModelTol)) {
                    throw ValidationError("probability-range", "measurement '" + m.label + "'",
                                          "response outside [0, 1]");
                }
            }
        }
        for (std::size_t l = 0; l < n; ++l) {
            double sum = 0.0;
            for (const auto &row : m.xi) {
                sum += row[l];
            }
            if (std::abs(sum - 1.0) > kModelTol) {
                throw ValidationError("row-sum", "measurement '" + m.label + "' at '" + ontic_[l] + "'",
                                      "responses do not sum to 1");
            }
        }
    }
}

const std::vector<double> &DiscreteModel::mu(const std::string &label) const {
    auto it = mu_.find(label);
    if (it == mu_.end()) {
        throw ContractError("DiscreteModel: unknown preparation '" + label + "'");
    }
    return it->second;
}

double DiscreteModel::prob(const std::string &prep, const std::string &measurement, const std::string &outcome) const {
    const auto &row = mu(prep);
    for (const auto &m : measurements_) {
        if (m.label != measurement) {
            continue;
        }
        auto it = std::find(m.outcomes.begin(), m.outcomes.end(), outcome);
        if (it == m.outcomes.end()) {
            throw ContractError("DiscreteModel: unknown outcome '" + outcome + "' of '" + measurement + "'");
        }
        const auto &xi = m.xi[static_cast<std::size_t>(it - m.outcomes.begin())];
        double s = 0.0;
        for (std::size_t l = 0; l < row.size(); ++l) {
            s += row[l] * xi[l];
        }
        return s;
    }
    throw ContractError("DiscreteModel: unknown measurement '" + measurement + "'");
}

std::vector<double> DiscreteModel::mixture(const optable::Mixture &m) const {
    std::vector<double> out(ontic_.size(), 0.0);
    for (const auto &[label, w] : m.weights()) {
        const auto &row = mu(label);
        for (std::size_t l = 0; l < out.size(); ++l) {
            out[l] += w * row[l];
        }
    }
    return out;
}

double DiscreteModel::total_variation(const optable::Mixture &a, const optable::Mixture &b) const {
    auto pa = mixture(a);
    auto pb = mixture(b);
    double s = 0.0;
    for (std::size_t l = 0; l < pa.size(); ++l) {
        s += std::abs(pa[l] - pb[l]);
    }
    return 0.5 * s;
}

double DiscreteModel::reconstruction_residual(const optable::ProbTable &t,
                                              const std::vector<std::string> &labels) const {
    double worst = 0.0;
    for (const auto &label : labels) {
        std::size_t pi = t.prep_index(label);
        for (std::size_t mi = 0; mi < t.measurements().size(); ++mi) {
            const auto &m = t.measurements()[mi];
            for (std::size_t o = 0; o < m.outcomes.size(); ++o) {
                worst = std::max(worst, std::abs(prob(label, m.label, m.outcomes[o]) - t.prob(mi, o, pi)));
            }
        }
    }
    return worst;
}

nlohmann::json DiscreteModel::to_json() const {
    nlohmann::json j;
    j["ontic"] = ontic_;
    j["mu"] = mu_;
    j["measurements"] = nlohmann::json::array();
    for (const auto &m : measurements_) {
        j["measurements"].push_back({{"label", m.label}, {"outcomes", m.outcomes}, {"xi", m.xi}});
    }
    return j;
}

DiscreteModel DiscreteModel::from_json(const nlohmann::json &j) {
    try {
        std::vector<ModelMeasurement> ms;
        for (const auto &m : j.at("measurements")) {
            ms.push_back({m.at("label").get<std::string>(), m.at("outcomes").get<std::vector<std::string>>(),
                          m.at("xi").get<std::vector<std::vector<double>>>()});
        }
        return DiscreteModel(j.at("ontic").get<std::vector<std::string>>(),
                             j.at("mu").get<std::map<std::string, std::vector<double>>>(), std::move(ms));
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError("schema", "model", e.what());
    }
}

DiscreteModel kitchen_sink_model(const optable::ProbTable &t, const std::vector<std::string> &extremal_labels,
                                 std::size_t cap) {
    const auto &meas = t.measurements();
    std::size_t size = 1;
    for (const auto &m : meas) {
        if (size > cap / m.outcomes.size()) {
            throw ContractError("kitchen_sink_model: ontic space exceeds the size cap");
        }
        size *= m.outcomes.size();
    }
    if (size > cap) {
        throw ContractError("kitchen_sink_model: ontic space exceeds the size cap");
    }
    // Ontic index digits, first measurement most significant.
    auto digits = [&](std::size_t l) {
        std::vector<std::size_t> d(meas.size());
        for (std::size_t k = meas.size(); k-- > 0;) {
            d[k] = l % meas[k].outcomes.size();
            l /= meas[k].outcomes.size();
        }
        return d;
    };
    std::vector<std::string> ontic(size);
    for (std::size_t l = 0; l < size; ++l) {
        auto d = digits(l);
        std::string label;
        for (std::size_t k = 0; k < meas.size(); ++k) {
            label += (k ? "," : "") + meas[k].label + "=" + meas[k].outcomes[d[k]];
        }
        ontic[l] = label;
    }

    std::vector<std::string> extremal = extremal_labels.empty() ? t.preparations() : extremal_labels;
    std::map<std::string, std::vector<double>> mu;
    for (const auto &label : extremal) {
        std::size_t pi = t.prep_index(label);
        std::vector<double> row(size);
        for (std::size_t l = 0; l < size; ++l) {
            auto d = digits(l);
            double v = 1.0;
            for (std::size_t k = 0; k < meas.size(); ++k) {
                v *= t.prob(k, d[k], pi);
            }
            row[l] = v;
        }
        mu[label] = std::move(row);
    }

    for (const auto &label : t.preparations()) {
        if (mu.count(label)) {
            continue;
        }
        // Decompose the column over extremal columns: w >= 0, sum w = 1.
        const auto &target = t.column(t.prep_index(label));
        lp::Problem prob(extremal.size());
        for (std::size_t r = 0; r < t.num_rows(); ++r) {
            std::vector<double> row(extremal.size());
            for (std::size_t e = 0; e < extremal.size(); ++e) {
                row[e] = t.column(t.prep_index(extremal[e]))[r];
            }
            prob.add_equality(std::move(row), target[r]);
        }
        prob.add_equality(std::vector<double>(extremal.size(), 1.0), 1.0);
        auto sol = lp::solve(prob);
        if (sol.status != lp::Status::Optimal || sol.residual > 1e-8) {
            throw ContractError("kitchen_sink_model: '" + label + "' is not a mixture of the extremal preparations");
        }
        std::vector<double> row(size, 0.0);
        for (std::size_t e = 0; e < extremal.size(); ++e) {
            const auto &src = mu[extremal[e]];
            for (std::size_t l = 0; l < size; ++l) {
                row[l] += sol.x[e] * src[l];
            }
        }
        mu[label] = std::move(row);
    }

    std::vector<ModelMeasurement> ms;
    for (std::size_t k = 0; k < meas.size(); ++k) {
        ModelMeasurement m{meas[k].label, meas[k].outcomes,
                           std::vector<std::vector<double>>(meas[k].outcomes.size(), std::vector<double>(size, 0.0))};
        for (std::size_t l = 0; l < size; ++l) {
            m.xi[digits(l)[k]][l] = 1.0;
        }
        ms.push_back(std::move(m));
    }
    return DiscreteModel(std::move(ontic), std::move(mu), std::move(ms));
}

DiscreteModel noisy_pnc_discrete_model(const GridPtr &grid, double p, const std::vector<std::string> &prep_labels,
                                       const std::vector<BlochVector> &prep_directions,
                                       const std::vector<std::string> &meas_labels,
                                       const std::vector<BlochVector> &meas_directions) {
    if (prep_labels.size() != prep_directions.size() || meas_labels.size() != meas_directions.size()) {
        throw ContractError("noisy_pnc_discrete_model: labels and directions differ in length");
    }
    std::vector<std::string> ontic(grid->size());
    for (std::size_t i = 0; i < ontic.size(); ++i) {
        ontic[i] = "n" + std::to_string(i);
    }
    const auto &w = grid->weights();
    std::map<std::string, std::vector<double>> mu;
    for (std::size_t k = 0; k < prep_labels.size(); ++k) {
        auto d = noisy_pnc_density(grid, p, prep_directions[k]);
        for (std::size_t i = 0; i < d.values.size(); ++i) {
            d.values[i] *= w[i];
        }
        mu[prep_labels[k]] = std::move(d.values);
    }
    std::vector<ModelMeasurement> ms;
    for (std::size_t k = 0; k < meas_labels.size(); ++k) {
        auto up = ks_response(grid, meas_directions[k]);
        auto down = ks_response(grid, meas_directions[k] * -1.0);
        ms.push_back({meas_labels[k], {"0", "1"}, {std::move(up), std::move(down)}});
    }
    return DiscreteModel(std::move(ontic), std::move(mu), std::move(ms));
}

KkhBound kkh_upper_bound(std::size_t dim, const TvOracle &oracle, std::size_t accepted_pairs, std::uint64_t seed) {
    if (dim < 2) {
        throw ContractError("kkh_upper_bound: dimension must be >= 2");
    }
    if (accepted_pairs == 0) {
        throw ContractError("kkh_upper_bound: need at least one pair");
    }
    const double threshold = 1.0 / (2.0 * static_cast<double>(dim));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto haar_ket = [&] {
        std::vector<qmath::Complex> v(dim);
        double norm = 0.0;
        for (auto &c : v) {
            c = {normal(rng), normal(rng)};
            norm += std::norm(c);
        }
        for (auto &c : v) {
            c /= std::sqrt(norm);
        }
        return v;
    };
    KkhBound out;
    const std::size_t max_draws = 1000 * accepted_pairs;
    while (out.accepted < accepted_pairs) {
        if (out.drawn >= max_draws) {
            throw NumericalError("kkh_upper_bound: rejection sampling stalled");
        }
        ++out.drawn;
        auto a = haar_ket();
        auto b = haar_ket();
        qmath::Complex ip = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            ip += std::conj(a[i]) * b[i];
        }
        if (std::norm(ip) < threshold) {
            continue;
        }
        ++out.accepted;
        double tv = 0.0;
        try {
            tv = oracle(DensityOperator::pure(a), DensityOperator::pure(b));
        } catch (const std::exception &e) {
            throw NumericalError(std::string("kkh_upper_bound: oracle failed: ") + e.what());
        }
        if (!std::isfinite(tv) || tv < -1e-9 || tv > 1.0 + 1e-9) {
            throw NumericalError("kkh_upper_bound: oracle returned a value outside [0, 1]");
        }
        out.max_tv = std::max(out.max_tv, tv);
    }
    out.bound = 1.0 - threshold * (1.0 - std::min(out.max_tv, 1.0));
    return out;
}

Lemma1Report lemma1_audit(const DiscreteModel &model, const std::vector<std::string> &labels,
                          const optable::ProbTable &theory, double c_prep_bound, double tol) {
    if (labels.empty()) {
        throw ContractError("lemma1_audit: no labels");
    }
    for (const auto &l : labels) {
        if (!theory.has_preparation(l)) {
            throw ContractError("lemma1_audit: '" + l + "' is not a preparation of the theory");
        }
        model.mu(l);
    }
    Lemma1Report r;
    r.n = labels.size();
    r.c_prep = c_prep_bound;
    for (std::size_t l = 0; l < model.size(); ++l) {
        double hi = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto &z : labels) {
            double v = model.mu(z)[l];
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        r.sum_max += hi;
        r.sum_min += lo;
    }
    // One alphabet whose messages are the labels: the minimax LPs give the
    // infima over the hull exactly.
    auto ab = optable::alpha_beta_operational(theory, {labels});
    r.gamma1 = ab.alpha;
    r.gamma2 = ab.beta;
    double nc = static_cast<double>(r.n) * c_prep_bound;
    r.max_rhs = ab.alpha.is_finite() ? ab.alpha.value() * (1.0 + nc) : std::numeric_limits<double>::infinity();
    r.min_rhs = (ab.beta.is_finite() ? 1.0 / ab.beta.value() : 0.0) - nc;
    r.max_holds = r.sum_max <= r.max_rhs + tol;
    r.min_holds = r.sum_min >= r.min_rhs - tol;
    r.passed = r.max_holds && r.min_holds;
    return r;
}

Theorem2Report theorem2_audit(const TvOracle &oracle,
                              const std::vector<std::pair<DensityOperator, DensityOperator>> &pairs,
                              double c_prep_bound, double tol) {
    Theorem2Report r;
    for (const auto &[a, b] : pairs) {
        Theorem2Pair p;
        try {
            p.tv = oracle(a, b);
        } catch (const std::exception &e) {
            throw NumericalError(std::string("theorem2_audit: oracle failed: ") + e.what());
        }
        p.trace = qmath::trace_distance(a, b);
        p.gap = p.tv - p.trace;
        p.lower_ok = p.gap >= -tol;
        p.upper_ok = p.gap <= c_prep_bound * (1.0 + p.trace) + tol;
        r.max_gap = std::max(r.max_gap, p.gap);
        r.passed = r.passed && p.lower_ok && p.upper_ok;
        r.pairs.push_back(p);
    }
    return r;
}

TvOracle ks_tv_oracle(std::size_t order) {
    return [order](const DensityOperator &a, const DensityOperator &b) {
        return ks_pair_total_variation(pure_qubit_direction(a), pure_qubit_direction(b), order);
    };
}

}  // namespace contextcalc::ontomodels
