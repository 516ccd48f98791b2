#include "metaiot/hash.hpp"

namespace metaiot {

std::uint64_t hash_scene(const Scene& scene)
{
    Fnv1a h;
    h.add(scene.dims());
    h.add(scene.grid_res());
    h.add(scene.tx_pos());
    h.add(scene.rx_pos());
    h.add(scene.n_conditions());
    h.add(static_cast<std::uint64_t>(scene.candidates().size()));
    for (const auto& c : scene.candidates()) h.add(c);
    return h.value();
}

std::uint64_t hash_designs(std::span<const DeviceDesign> designs)
{
    Fnv1a h;
    h.add(static_cast<std::uint64_t>(designs.size()));
    for (const auto& d : designs) {
        h.add(d.area);
        h.add(d.units_per_side);
        h.add(static_cast<std::uint64_t>(d.srrs.size()));
        for (const auto& s : d.srrs) {
            for (double v : {s.r_ring, s.l_self, s.c_surf, s.gap_width, s.gap_area, s.eps_gap, s.coupling}) h.add(v);
            h.add(static_cast<int>(s.material.kind));
            h.add(s.material.r_ref);
            h.add(s.material.sensitivity);
            h.add(s.material.t_ref);
            for (const auto& c : s.material.cross) {
                h.add(static_cast<int>(c.kind));
                h.add(c.coeff);
                h.add(c.ref);
            }
        }
    }
    return h.value();
}

std::uint64_t hash_string(std::string_view s)
{
    Fnv1a h;
    h.bytes(s.data(), s.size());
    return h.value();
}

} // namespace metaiot
