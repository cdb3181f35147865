#include "orbifold/signatures.hpp"

#include "orbifold/quotient_orbifold.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace orbifold {

OrbifoldSignature::OrbifoldSignature(int genus_, std::vector<int> orders_)
    : genus(genus_), orders(std::move(orders_))
{
    if (genus < 0) throw std::invalid_argument("genus must be >= 0");
    for (int m : orders)
        if (m < 2) throw std::invalid_argument("stabilizer orders must be >= 2");
    std::sort(orders.begin(), orders.end(), std::greater<>());
}

std::string OrbifoldSignature::str() const
{
    std::ostringstream os;
    os << "(" << genus << ";";
    for (std::size_t i = 0; i < orders.size(); ++i) os << (i ? "," : " ") << orders[i];
    if (orders.empty()) os << " -";
    os << ")";
    return os.str();
}

Rational canonical_degree(const OrbifoldSignature& sig)
{
    Rational deg(2 * sig.genus - 2 + static_cast<long>(sig.orders.size()));
    for (int m : sig.orders) deg -= Rational(1, m);
    deg.canonicalize();
    return deg;
}

std::vector<OrbifoldSignature> enumerate_flat(int genus)
{
    if (genus < 0) throw std::invalid_argument("genus must be >= 0");
    std::vector<OrbifoldSignature> out;
    const Rational target(2 - 2 * genus);
    if (target <= 0) return out;  // every summand 1 - 1/m is positive

    // Each summand lies in [1/2, 1), so n/2 <= target < n.
    const long n_max = Rational(2 * target).get_num().get_si();
    std::vector<int> ascending;
    // Fill orders in ascending sequence; remaining k summands are each >= 1 - 1/m_min.
    std::function<void(int, int, Rational)> search = [&](int slots, int m_min, Rational remaining) {
        if (remaining >= slots) return;  // each summand is < 1
        if (slots == 1) {
            // 1 - 1/m = remaining  =>  m = 1 / (1 - remaining)
            const Rational rest = Rational(1) - remaining;
            if (rest <= 0) return;
            const Rational m = Rational(1) / rest;
            if (is_integer(m) && m >= m_min) {
                auto orders = ascending;
                orders.push_back(static_cast<int>(m.get_num().get_si()));
                out.emplace_back(genus, std::move(orders));
            }
            return;
        }
        for (int m = m_min;; ++m) {
            const Rational term = Rational(1) - Rational(1, m);
            // All remaining slots are at least `term`.
            if (term * slots > remaining) break;
            ascending.push_back(m);
            search(slots - 1, m, remaining - term);
            ascending.pop_back();
        }
    };
    for (long n = 1; n <= n_max; ++n) {
        if (!(Rational(n) > target)) continue;  // need target < n
        search(static_cast<int>(n), 2, target);
    }
    // Larger n first, then lexicographically larger orders first.
    std::sort(out.begin(), out.end(), [](const OrbifoldSignature& a, const OrbifoldSignature& b) {
        if (a.orders.size() != b.orders.size()) return a.orders.size() > b.orders.size();
        return a.orders > b.orders;
    });
    return out;
}

std::shared_ptr<const QuotientTorusOrbifold> realize(const OrbifoldSignature& sig)
{
    if (sig.genus == 0) {
        if (sig.orders == std::vector<int>{2, 2, 2, 2}) return preset_orbifold("pillowcase");
        if (sig.orders == std::vector<int>{4, 4, 2}) return preset_orbifold("P1_442");
        if (sig.orders == std::vector<int>{6, 3, 2}) return preset_orbifold("P1_632");
        if (sig.orders == std::vector<int>{3, 3, 3}) return preset_orbifold("P1_333");
    }
    throw std::invalid_argument("signature " + sig.str() + " is not a flat elliptic orbifold");
}

ChernStatus chern_status(const OrbifoldSignature& sig)
{
    ChernStatus status;
    status.real_c1_zero = canonical_degree(sig) == 0;
    // The integral class restricts to a generator of Z/m_i at each stacky point.
    status.integral_c1_zero = sig.orders.empty() && status.real_c1_zero;
    long m = 1;
    for (int o : sig.orders) m = lcm(m, static_cast<long>(o));
    status.torsion_order = m;
    return status;
}

}  // namespace orbifold
