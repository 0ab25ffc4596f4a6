#include "solfree/rational.hpp"

#include <cctype>
#include <cmath>
#include <numeric>

#include "solfree/error.hpp"

namespace solfree {

std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw ParseError("empty rational");

    auto valid_int = [](const std::string& t) {
        std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
        if (i >= t.size()) return false;
        for (; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };
    auto strip_plus = [](std::string t) { return (!t.empty() && t[0] == '+') ? t.substr(1) : t; };

    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!valid_int(num) || !valid_int(den)) throw ParseError("malformed rational '" + s + "'");
        BigInt d(strip_plus(den));
        if (d == 0) throw ParseError("zero denominator in '" + s + "'");
        Rational q(BigInt(strip_plus(num)), d);
        q.canonicalize();
        return q;
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        bool neg = !whole.empty() && whole[0] == '-';
        std::string digits = (whole.empty() || whole == "-" || whole == "+") ? "0" : whole;
        if (!valid_int(digits) || (!frac.empty() && !valid_int(frac)) || (!frac.empty() && (frac[0] == '-' || frac[0] == '+')))
            throw ParseError("malformed decimal '" + s + "'");
        BigInt scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        BigInt w(strip_plus(digits));
        if (w < 0) w = -w;
        BigInt f = frac.empty() ? BigInt(0) : BigInt(frac);
        Rational q(w * scale + f, scale);
        q.canonicalize();
        return neg ? Rational(-q) : q;
    }
    if (!valid_int(s)) throw ParseError("malformed rational '" + s + "'");
    return Rational(BigInt(strip_plus(s)));
}

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite value cannot be made rational");
    Rational q;
    q = x;  // mpq_set_d is exact
    return q;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    Rational q(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
    q.canonicalize();
    return q;
}

BigInt to_bigint(unsigned __int128 v) {
    BigInt hi(static_cast<unsigned long>(v >> 64));
    BigInt lo(static_cast<unsigned long>(v & 0xffffffffffffffffULL));
    return (hi << 64) + lo;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t lcm64(std::int64_t a, std::int64_t b) { return std::lcm(a, b); }

std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
    std::int64_t old_r = m, r = mod_floor(a, m);
    std::int64_t old_s = 0, s = 1;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1) throw DomainError("no inverse of " + std::to_string(a) + " modulo " + std::to_string(m));
    return mod_floor(old_s, m);
}

}  // namespace solfree
