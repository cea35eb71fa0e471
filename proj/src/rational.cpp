#include "leadmetric/rational.hpp"

#include "leadmetric/errors.hpp"

#include <cctype>
#include <cstdio>

namespace leadmetric {

namespace {

bool is_integer_literal(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    // no leading zeros except "0" itself
    std::string_view digits = s[0] == '-' ? s.substr(1) : s;
    return !(digits.size() > 1 && digits[0] == '0') && s != "-0";
}

}  // namespace

Rational parse_rational(std::string_view text, bool allow_integer) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (!allow_integer) {
            throw ParseError("", "rational \"" + std::string(text) + "\" is not of the form p/q");
        }
        if (!is_integer_literal(text)) {
            throw ParseError("", "malformed integer \"" + std::string(text) + "\"");
        }
        return Rational(mpz_class(std::string(text)));
    }
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den) || den[0] == '-') {
        throw ParseError("", "malformed rational \"" + std::string(text) + "\"");
    }
    mpz_class p(std::string{num});
    mpz_class q(std::string{den});
    if (q == 0) throw ParseError("", "zero denominator in \"" + std::string(text) + "\"");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
    if (g != 1) {
        throw ParseError("", "rational \"" + std::string(text) + "\" is not reduced");
    }
    Rational r(p, q);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_decimal(const Rational& value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value.get_d());
    return buf;
}

Rational pow2_inverse(unsigned long k) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
    return Rational(mpz_class(1), den);
}

}  // namespace leadmetric
