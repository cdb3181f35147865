#include "orbifold/exact.hpp"

#include <numeric>
#include <stdexcept>

namespace orbifold {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool valid_integer_text(std::string_view s)
{
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

Integer parse_integer(std::string_view s)
{
    if (!valid_integer_text(s)) throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    if (s.front() == '+') s.remove_prefix(1);
    return Integer(std::string(s));
}

}  // namespace

Rational parse_rational(std::string_view text)
{
    auto s = trim(text);
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(parse_integer(s));
    Integer num = parse_integer(trim(s.substr(0, slash)));
    Integer den = parse_integer(trim(s.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& r)
{
    Rational c = r;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::string to_string(const Integer& z) { return z.get_str(); }

Rational frac(const Rational& r)
{
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    Rational out = r - Rational(fl);
    out.canonicalize();
    return out;
}

Integer gcd(const Integer& a, const Integer& b)
{
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

Integer lcm(const Integer& a, const Integer& b)
{
    Integer l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

long lcm(long a, long b) { return std::lcm(a, b); }

bool is_integer(const Rational& r)
{
    Rational c = r;
    c.canonicalize();
    return c.get_den() == 1;
}

std::vector<Rational> parse_rational_list(std::string_view text, char sep)
{
    std::vector<Rational> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(sep, start);
        if (end == std::string_view::npos) end = text.size();
        auto piece = trim(text.substr(start, end - start));
        if (!piece.empty()) out.push_back(parse_rational(piece));
        start = end + 1;
    }
    return out;
}

std::vector<long> parse_int_list(std::string_view text, char sep)
{
    std::vector<long> out;
    for (const auto& r : parse_rational_list(text, sep)) {
        if (!is_integer(r)) throw std::invalid_argument("expected integers, got " + to_string(r));
        out.push_back(r.get_num().get_si());
    }
    return out;
}

}  // namespace orbifold
