#include "operforge/rational.hpp"

#include <cctype>

namespace operforge {

std::string format_rational(const Rational& value) {
    Rational q = value;
    q.canonicalize();
    if (q.get_den() == 1)
        return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty())
        return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    return true;
}

} // namespace

std::optional<Rational> parse_rational(std::string_view text) {
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    auto slash = body.find('/');
    std::string_view num = body.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
        return std::nullopt;
    mpz_class p(std::string(num), 10);
    mpz_class q(std::string(den), 10);
    if (q == 0)
        return std::nullopt;
    Rational r(p, q);
    r.canonicalize();
    if (negative)
        r = -r;
    return r;
}

std::optional<Rational> rational_root(const Rational& q, unsigned n) {
    if (n == 0)
        return std::nullopt;
    if (n == 1)
        return q;
    if (q < 0 && n % 2 == 0)
        return std::nullopt;
    mpz_class num = abs(q.get_num());
    mpz_class den = q.get_den();
    mpz_class rn, rd;
    if (!mpz_root(rn.get_mpz_t(), num.get_mpz_t(), n))
        return std::nullopt;
    if (!mpz_root(rd.get_mpz_t(), den.get_mpz_t(), n))
        return std::nullopt;
    Rational r(rn, rd);
    r.canonicalize();
    if (q < 0)
        r = -r;
    return r;
}

} // namespace operforge
