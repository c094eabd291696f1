#include "pmf/carrier_bank.hpp"

#include <algorithm>

#include "pmf/random.hpp"

namespace pmf {

CarrierBank::CarrierBank(ActivityMeasure act, WindowFamily family, std::uint64_t seed)
    : act_(std::move(act)), family_(std::move(family)), seed_(seed) {}

std::uint64_t CarrierBank::turn_key(std::uint64_t key, int side, std::size_t index) {
    return hash_combine(hash_combine(key, side > 0 ? 1 : 2), index) | (1ULL << 63);
}

const std::vector<CarrierEvent>& CarrierBank::events(std::uint64_t key, const Line& l, int side) {
    auto slot = std::make_pair(key, side);
    auto it = cache_.find(slot);
    if (it != cache_.end()) return it->second;

    std::vector<CarrierEvent> out;
    const double m = act_.m_max();
    auto chord = family_.base().chord(l);
    if (m > 0.0 && chord) {
        Anchor a = family_.anchor(l);
        Point d = static_cast<double>(side) * l.direction();
        double ua = l.param(a.point);
        double u_max = side > 0 ? chord->u1 - ua : ua - chord->u0;
        Rng rng(hash_combine(seed_, hash_combine(key, side > 0 ? 1 : 2)));
        // kill and turn at rate 2 m each, thinned against the local density
        std::uint64_t n = u_max > 0.0 ? rng.poisson(4.0 * m * u_max) : 0;
        std::vector<double> us(n);
        for (auto& u : us) u = rng.uniform(0.0, u_max);
        std::sort(us.begin(), us.end(), std::greater<>());
        for (double u : us) {
            bool kill = rng.uniform() < 0.5;
            double gap = sample_sine_gap(rng);
            double keep = rng.uniform();
            if (u <= 0.0) continue;
            Point q = a.point + u * d;
            Line nl = Line::through(q, l.phi + gap);
            if (act_.kind() != ActivityMeasure::Kind::homogeneous && keep * m >= act_.density(nl)) continue;
            CarrierEvent e;
            e.u = u;
            e.t = family_.reveal_time(q);
            e.p = q;
            e.kill = kill;
            if (!kill) e.turn = nl;
            out.push_back(e);
        }
    }
    return cache_.emplace(slot, std::move(out)).first->second;
}

}  // namespace pmf
