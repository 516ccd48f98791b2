#include "metaiot/placement.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "metaiot/error.hpp"
#include "metaiot/rng.hpp"

namespace metaiot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> random_subset(int population, int count, std::mt19937_64& rng)
{
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int k = 0; k < population; ++k) pool[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < count; ++k) {
        std::uniform_int_distribution<int> pick(k, population - 1);
        std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

PlacementResult make_result(const Scene& scene, std::vector<int> indices, double objective)
{
    PlacementResult r;
    r.placement = placement_from_indices(scene, indices);
    r.indices = std::move(indices);
    r.objective = objective;
    return r;
}

void require_feasible(const Scene& scene, const GainTable& gains, int n_devices)
{
    if (n_devices < 1) throw DomainError("need at least one device");
    if (gains.size() != static_cast<int>(scene.candidates().size())) {
        throw ShapeError("gain table does not match the scene candidates");
    }
    if (static_cast<int>(scene.candidates().size()) < n_devices) {
        throw InfeasibleError("only " + std::to_string(scene.candidates().size()) + " candidates for " +
                              std::to_string(n_devices) + " devices");
    }
}

} // namespace

void validate(const SaParams& params)
{
    if (!(params.t_init > 0)) throw ConfigError("sa.t_init must be positive");
    if (!(params.alpha > 0 && params.alpha < 1)) throw ConfigError("sa.alpha must lie in (0, 1)");
    if (params.iters_max < 1) throw ConfigError("sa.iters_max must be at least 1");
    if (params.stall_limit < 1) throw ConfigError("sa.stall_limit must be at least 1");
}

double channel_gain(const Scene& scene, const LinkParams& link, const Vec3& steer_target, const Vec3& reflector,
                    double f)
{
    const double gt = array_gain(link.tx_array, angles(scene.tx_pos(), steer_target),
                                 angles(scene.tx_pos(), reflector), f);
    const double gr = array_gain(link.rx_array, angles(scene.rx_pos(), steer_target),
                                 angles(scene.rx_pos(), reflector), f);
    return gt * gr;
}

double objective(const Scene& scene, const LinkParams& link, const PlacementSet& placement, double f)
{
    const std::size_t n = placement.size();
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double interference = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) interference += channel_gain(scene, link, placement.positions[i], placement.positions[j], f);
        }
        if (n == 1) continue;
        const double target = channel_gain(scene, link, placement.positions[i], placement.positions[i], f);
        const double ratio = interference > 0 ? target / interference : kInf;
        best = std::min(best, ratio);
    }
    return best;
}

GainTable::GainTable(const Scene& scene, const LinkParams& link, std::span<const double> frequencies)
{
    if (frequencies.empty()) throw DomainError("gain table needs at least one frequency");
    const auto& cand = scene.candidates();
    const auto k = static_cast<Eigen::Index>(cand.size());
    gains_ = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index s = 0; s < k; ++s) {
        for (Eigen::Index r = 0; r < k; ++r) {
            double sum = 0;
            for (double f : frequencies) {
                sum += channel_gain(scene, link, cand[static_cast<std::size_t>(s)], cand[static_cast<std::size_t>(r)], f);
            }
            gains_(s, r) = sum / static_cast<double>(frequencies.size());
        }
    }
}

double GainTable::objective(std::span<const int> indices) const
{
    const std::size_t n = indices.size();
    if (n <= 1) return kInf;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double interference = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) interference += gains_(indices[i], indices[j]);
        }
        const double target = gains_(indices[i], indices[i]);
        best = std::min(best, interference > 0 ? target / interference : kInf);
    }
    return best;
}

PlacementResult anneal(const Scene& scene, const GainTable& gains, int n_devices, const SaParams& params)
{
    validate(params);
    require_feasible(scene, gains, n_devices);
    const int k_total = gains.size();

    std::mt19937_64 rng(params.seed);
    std::vector<int> current = random_subset(k_total, n_devices, rng);
    double current_obj = gains.objective(current);
    std::vector<int> best = current;
    double best_obj = current_obj;
    std::vector<double> trace{best_obj};

    // No move exists, or every placement scores +inf.
    if (n_devices == k_total || n_devices == 1) {
        auto r = make_result(scene, best, best_obj);
        r.trace = std::move(trace);
        return r;
    }

    std::vector<char> occupied(static_cast<std::size_t>(k_total), 0);
    for (int c : current) occupied[static_cast<std::size_t>(c)] = 1;

    std::uniform_int_distribution<int> pick_device(0, n_devices - 1);
    std::uniform_int_distribution<int> pick_free(0, k_total - n_devices - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double temperature = params.t_init;
    int stall = 0;
    std::vector<int> proposal;
    for (int it = 0; it < params.iters_max; ++it) {
        const int d = pick_device(rng);
        // the r-th unoccupied candidate in index order
        int r = pick_free(rng);
        int target = -1;
        for (int c = 0; c < k_total; ++c) {
            if (occupied[static_cast<std::size_t>(c)]) continue;
            if (r-- == 0) {
                target = c;
                break;
            }
        }
        proposal = current;
        proposal[static_cast<std::size_t>(d)] = target;
        const double proposal_obj = gains.objective(proposal);

        bool accept;
        if (proposal_obj > current_obj || (std::isinf(proposal_obj) && std::isinf(current_obj))) {
            accept = true;
        } else {
            const double delta = params.log_scale ? 10.0 * std::log10(proposal_obj / current_obj)
                                                  : proposal_obj - current_obj;
            accept = unit(rng) < std::exp(delta / temperature);
        }
        if (accept) {
            occupied[static_cast<std::size_t>(current[static_cast<std::size_t>(d)])] = 0;
            occupied[static_cast<std::size_t>(target)] = 1;
            current.swap(proposal);
            current_obj = proposal_obj;
        }
        temperature *= params.alpha;

        if (current_obj > best_obj) {
            best = current;
            best_obj = current_obj;
            stall = 0;
        } else {
            ++stall;
        }
        trace.push_back(best_obj);
        if (stall >= params.stall_limit) break;
    }

    auto result = make_result(scene, best, best_obj);
    result.trace = std::move(trace);
    return result;
}

PlacementResult anneal(const Scene& scene, const LinkParams& link, int n_devices, const SaParams& params, double f)
{
    const double freqs[] = {f};
    return anneal(scene, GainTable(scene, link, freqs), n_devices, params);
}

PlacementResult anneal_chains(const Scene& scene, const GainTable& gains, int n_devices, const SaParams& params,
                              int chains)
{
    if (chains < 1) throw ConfigError("need at least one annealing chain");
    PlacementResult best;
    for (int c = 0; c < chains; ++c) {
        SaParams p = params;
        p.seed = chains == 1 ? params.seed : derive_seed(params.seed, static_cast<std::uint64_t>(c));
        auto r = anneal(scene, gains, n_devices, p);
        if (c == 0 || r.objective > best.objective) best = std::move(r);
    }
    return best;
}

PlacementResult exhaustive_placement(const Scene& scene, const GainTable& gains, int n_devices)
{
    require_feasible(scene, gains, n_devices);
    const int k_total = gains.size();
    std::vector<int> idx(static_cast<std::size_t>(n_devices));
    for (int k = 0; k < n_devices; ++k) idx[static_cast<std::size_t>(k)] = k;

    std::vector<int> best = idx;
    double best_obj = -kInf;
    while (true) {
        const double v = gains.objective(idx);
        if (v > best_obj) {
            best_obj = v;
            best = idx;
        }
        // next combination in lexicographic order
        int pos = n_devices - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == k_total - n_devices + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < n_devices; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
    auto r = make_result(scene, best, best_obj);
    r.trace = {best_obj};
    return r;
}

PlacementResult random_placement(const Scene& scene, const GainTable& gains, int n_devices, std::uint64_t seed)
{
    require_feasible(scene, gains, n_devices);
    std::mt19937_64 rng(seed);
    auto idx = random_subset(gains.size(), n_devices, rng);
    const double obj = gains.objective(idx);
    auto r = make_result(scene, std::move(idx), obj);
    r.trace = {obj};
    return r;
}

} // namespace metaiot
