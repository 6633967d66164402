#pragma once

#include <cstdint>
#include <random>

#include "ipskit/errors.hpp"

namespace ipskit {

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin; the listed bases decide primality for all n < 2^64.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

} // namespace detail

// A runtime-chosen prime modulus, 2 <= p < 2^61.
class Prime {
public:
    explicit Prime(std::uint64_t p) : p_(p) {
        if (p >= (1ull << 61) || !detail::is_prime_u64(p))
            throw NotPrime("modulus " + std::to_string(p) + " is not a prime below 2^61");
    }
    std::uint64_t value() const { return p_; }
    friend bool operator==(const Prime& a, const Prime& b) { return a.p_ == b.p_; }

private:
    std::uint64_t p_;
};

inline std::uint64_t next_prime_at_least(std::uint64_t n) {
    if (n <= 2) return 2;
    if (n % 2 == 0) ++n;
    while (!detail::is_prime_u64(n)) n += 2;
    return n;
}

// Element of F_p in canonical representation.
struct FieldElement {
    std::uint64_t value;
    std::uint64_t p;

    FieldElement() : value(0), p(2) {}
    FieldElement(std::uint64_t v, const Prime& prime) : value(v % prime.value()), p(prime.value()) {}
    FieldElement(std::uint64_t v, std::uint64_t modulus) : value(v % modulus), p(modulus) {}

    static FieldElement from_int(std::int64_t v, std::uint64_t modulus) {
        std::int64_t r = v % static_cast<std::int64_t>(modulus);
        if (r < 0) r += static_cast<std::int64_t>(modulus);
        return FieldElement(static_cast<std::uint64_t>(r), modulus);
    }

    bool is_zero() const { return value == 0; }

    friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
        check_same(a, b);
        std::uint64_t s = a.value + b.value;
        if (s >= a.p) s -= a.p;
        return FieldElement(s, a.p);
    }
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
        check_same(a, b);
        std::uint64_t s = a.value >= b.value ? a.value - b.value : a.value + a.p - b.value;
        return FieldElement(s, a.p);
    }
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
        check_same(a, b);
        return FieldElement(detail::mulmod_u64(a.value, b.value, a.p), a.p);
    }
    FieldElement operator-() const { return FieldElement(value == 0 ? 0 : p - value, p); }
    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.p == b.p && a.value == b.value;
    }

private:
    static void check_same(const FieldElement& a, const FieldElement& b) {
        if (a.p != b.p) throw ModulusMismatch("field elements from different moduli");
    }
};

// Inverse via extended Euclid.
inline FieldElement fp_inverse(const FieldElement& a) {
    if (a.value == 0) throw ZeroInverse("inverse of 0 mod " + std::to_string(a.p));
    std::int64_t t = 0, newt = 1;
    std::int64_t r = static_cast<std::int64_t>(a.p), newr = static_cast<std::int64_t>(a.value);
    while (newr != 0) {
        std::int64_t q = r / newr;
        std::int64_t tmp = t - q * newt; t = newt; newt = tmp;
        tmp = r - q * newr; r = newr; newr = tmp;
    }
    if (t < 0) t += static_cast<std::int64_t>(a.p);
    return FieldElement(static_cast<std::uint64_t>(t), a.p);
}

inline FieldElement fp_pow(FieldElement base, std::uint64_t exp) {
    return FieldElement(detail::powmod_u64(base.value, exp, base.p), base.p);
}

// Seeded deterministic randomness for sampling and verifier trials.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t next_u64() { return eng_(); }
    // Uniform over [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return v % bound;
    }

private:
    std::mt19937_64 eng_;
};

inline FieldElement fp_sample(RandomSource& rng, const Prime& p) {
    return FieldElement(rng.next_below(p.value()), p);
}

} // namespace ipskit
