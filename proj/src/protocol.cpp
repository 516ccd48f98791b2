#include "metaiot/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "metaiot/error.hpp"

namespace metaiot {

FrequencyPlan::FrequencyPlan(double f_low, double f_high, int samples) : f_low_(f_low), f_high_(f_high)
{
    if (!(f_low > 0 && f_low < f_high)) throw ConfigError("frequency plan requires 0 < f_low < f_high");
    if (samples < 2) throw ConfigError("frequency plan requires at least 2 samples");
    freqs_.resize(samples);
    for (int k = 0; k < samples; ++k) freqs_[k] = f_low + (f_high - f_low) * k / (samples - 1);
    freqs_[samples - 1] = f_high;
}

MeasurementModel::MeasurementModel(const Scene& scene, PlacementSet placement, std::vector<DeviceDesign> designs,
                                   FrequencyPlan plan, LinkParams link)
    : scene_(scene),
      placement_(std::move(placement)),
      designs_(std::move(designs)),
      plan_(std::move(plan)),
      link_(link)
{
    const std::size_t n = placement_.size();
    if (n == 0) throw DomainError("placement is empty");
    if (designs_.size() != 1 && designs_.size() != n) throw ShapeError("need one design or one per device");
    for (std::size_t j = 0; j < designs_.size(); ++j) {
        if (designs_[j].srrs.size() != static_cast<std::size_t>(scene.n_conditions())) {
            throw ShapeError("device SRR count differs from the scene condition count");
        }
    }
    const auto L = static_cast<std::size_t>(plan_.size());
    links_.resize(n * n * L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < L; ++k)
                links_[(i * n + j) * L + k] =
                    device_link(scene, link_, placement_.positions[i], placement_.positions[j],
                                plan_[static_cast<int>(k)]);
}

Eigen::MatrixXd draw_noise(int samples, std::size_t devices, double noise_std_db, std::uint64_t seed)
{
    if (noise_std_db < 0) throw DomainError("noise standard deviation must be non-negative");
    Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(samples, static_cast<Eigen::Index>(devices));
    if (noise_std_db == 0) return noise;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, noise_std_db);
    for (Eigen::Index i = 0; i < noise.cols(); ++i)
        for (Eigen::Index k = 0; k < noise.rows(); ++k) noise(k, i) = dist(rng);
    return noise;
}

MeasurementMatrix MeasurementModel::measure(const EnvironmentField& field, std::uint64_t seed) const
{
    const std::size_t n = placement_.size();
    const int L = plan_.size();

    // Reflection of every device at every frequency under its local conditions.
    Eigen::MatrixXd reflection(L, static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const Eigen::VectorXd c = field_at(field, scene_, placement_.positions[j]);
        const std::span<const double> cs(c.data(), static_cast<std::size_t>(c.size()));
        const auto& design = design_for(designs_, j);
        for (int k = 0; k < L; ++k) reflection(k, static_cast<Eigen::Index>(j)) = device_reflection(design, plan_[k], cs).value;
    }

    const Eigen::MatrixXd noise = draw_noise(L, n, link_.noise_std_db, seed);
    const double env = environment_power(link_);

    MeasurementMatrix out;
    out.values.resize(L, static_cast<Eigen::Index>(n));
    out.plan = plan_;
    out.seed = seed;
    out.noise_std_db = link_.noise_std_db;
    out.positions = placement_.positions;

    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < L; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                powers[j] = reflected_power(link_, design_for(designs_, j).area, link(i, j, k),
                                            reflection(k, static_cast<Eigen::Index>(j)), plan_[k]);
            }
            const auto terms = compose_budget(powers, i, env, noise(k, static_cast<Eigen::Index>(i)));
            if (!std::isfinite(terms.total_db)) throw DomainError("non-finite received power");
            out.values(k, static_cast<Eigen::Index>(i)) = terms.total_db;
        }
    }
    return out;
}

MeasurementMatrix measure_all(const Scene& scene, const PlacementSet& placement,
                              std::span<const DeviceDesign> designs, const EnvironmentField& field,
                              const FrequencyPlan& plan, const LinkParams& link, std::uint64_t seed)
{
    MeasurementModel model(scene, placement, std::vector<DeviceDesign>(designs.begin(), designs.end()), plan, link);
    return model.measure(field, seed);
}

Eigen::VectorXd moving_average3(const Eigen::VectorXd& x)
{
    const Eigen::Index n = x.size();
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index lo = std::max<Eigen::Index>(k - 1, 0);
        const Eigen::Index hi = std::min<Eigen::Index>(k + 1, n - 1);
        y[k] = x.segment(lo, hi - lo + 1).mean();
    }
    return y;
}

PeakFeatures column_depth_features(const MeasurementMatrix& m, int n_srr)
{
    if (m.values.size() == 0) throw ShapeError("measurement matrix is empty");
    if (n_srr < 1) throw DomainError("need at least one SRR");
    const Eigen::Index L = m.values.rows();
    const Eigen::Index N = m.values.cols();
    if (m.plan.size() != L) throw ShapeError("plan length differs from matrix rows");

    PeakFeatures out;
    out.frequencies = Eigen::MatrixXd::Constant(N, n_srr, std::numeric_limits<double>::quiet_NaN());
    out.present = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(N, n_srr, false);

    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::VectorXd s = moving_average3(m.values.col(i));
        std::vector<Eigen::Index> minima;
        for (Eigen::Index k = 1; k + 1 < L; ++k) {
            if (s[k] < s[k - 1] && s[k] < s[k + 1]) minima.push_back(k);
        }
        // keep the deepest n_srr dips, report them by ascending frequency
        std::stable_sort(minima.begin(), minima.end(), [&](Eigen::Index a, Eigen::Index b) { return s[a] < s[b]; });
        if (static_cast<int>(minima.size()) > n_srr) minima.resize(static_cast<std::size_t>(n_srr));
        std::sort(minima.begin(), minima.end());
        for (std::size_t q = 0; q < minima.size(); ++q) {
            out.frequencies(i, static_cast<Eigen::Index>(q)) = m.plan[static_cast<int>(minima[q])];
            out.present(i, static_cast<Eigen::Index>(q)) = true;
        }
    }
    return out;
}

} // namespace metaiot
