#pragma once

// Shared builders for tests: quick polynomial construction, systems from
// polynomials, and the 2x2 matrix-inversion setup used in several places.

#include <array>
#include <cstdint>
#include <vector>

#include "ipskit/cnf.hpp"
#include "ipskit/ips.hpp"
#include "ipskit/poly.hpp"

namespace th {

using namespace ipskit;

inline SparsePoly X(int i, std::uint64_t mod = 0) { return SparsePoly::variable(VarId::X(i), mod); }
inline SparsePoly F(int i, std::uint64_t mod = 0) { return SparsePoly::variable(VarId::F(i), mod); }
inline SparsePoly K(std::int64_t c, std::uint64_t mod = 0) { return SparsePoly::constant(c, mod); }

inline PolySystem make_system(const std::vector<SparsePoly>& eqs, std::uint32_t n_vars,
                              std::uint64_t modulus = 0) {
    PolySystem sys;
    sys.n_vars = n_vars;
    sys.modulus = modulus;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        sys.equations.push_back(poly_to_circuit(eqs[i]));
        sys.provenance.push_back({EquationProvenance::Kind::User,
                                  static_cast<std::uint32_t>(i + 1)});
    }
    return sys;
}

inline Certificate make_refutation(const SparsePoly& cert_poly, const PolySystem& sys) {
    Certificate c;
    c.circuit = poly_to_circuit(cert_poly);
    c.system = sys;
    c.kind = CertKind::Refutation;
    return c;
}

inline Certificate make_derivation(const SparsePoly& cert_poly, const PolySystem& sys,
                                   const SparsePoly& target) {
    Certificate c;
    c.circuit = poly_to_circuit(cert_poly);
    c.system = sys;
    c.kind = CertKind::Derivation;
    c.target = poly_to_circuit(target);
    return c;
}

// 2x2 inversion principle: from XY = I derive YX = I without division, via
// the rational certificate X^{-1}(XY-I)X = (adj(X) Q X)_ab / det(X).
struct InversionSetup {
    PolySystem base;             // the four entries of XY - I
    PolySystem augmented;        // base plus det(X)
    Circuit den;                 // det(X)
    Certificate inverse_cert;    // refutation of {XY-I = 0, det(X) = 0}
    std::array<std::array<SparsePoly, 2>, 2> target;  // entries of YX - I
    std::array<std::array<Circuit, 2>, 2> num;        // entries of adj(X) Q X
};

inline InversionSetup inversion_setup(std::uint64_t mod) {
    auto x = [&](int i, int j) { return X(2 * (i - 1) + j, mod); };      // X entries: x1..x4
    auto y = [&](int i, int j) { return X(4 + 2 * (i - 1) + j, mod); };  // Y entries: x5..x8
    auto q = [&](int i, int j) { return F(2 * (i - 1) + j, mod); };      // placeholders f1..f4

    InversionSetup s;
    std::vector<SparsePoly> eqs;
    for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b) {
            SparsePoly r = x(a, 1) * y(1, b) + x(a, 2) * y(2, b);
            if (a == b) r = r - K(1, mod);
            eqs.push_back(r);
        }
    s.base = make_system(eqs, 8, mod);

    SparsePoly detX = x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1);
    SparsePoly detY = y(1, 1) * y(2, 2) - y(1, 2) * y(2, 1);
    s.den = poly_to_circuit(detX);

    auto aug_eqs = eqs;
    aug_eqs.push_back(detX);
    s.augmented = make_system(aug_eqs, 8, mod);

    // E = d*det(Y) - (r11 + r22 + r11 r22 - r12 r21), with d = f5 and
    // r_ab = q(a,b); under f = F, the bracket is det(XY) - 1 = det(X)det(Y) - 1.
    SparsePoly d = F(5, mod);
    SparsePoly e = d * detY - (q(1, 1) + q(2, 2) + q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1));
    s.inverse_cert.circuit = poly_to_circuit(e);
    s.inverse_cert.system = s.augmented;
    s.inverse_cert.kind = CertKind::Refutation;

    // adj(X) = [x22, -x12; -x21, x11]
    std::array<std::array<SparsePoly, 2>, 2> adj = {
        {{x(2, 2), x(1, 2).negated()}, {x(2, 1).negated(), x(1, 1)}}};
    std::array<std::array<SparsePoly, 2>, 2> Q = {{{q(1, 1), q(1, 2)}, {q(2, 1), q(2, 2)}}};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            SparsePoly yx = y(a + 1, 1) * x(1, b + 1) + y(a + 1, 2) * x(2, b + 1);
            if (a == b) yx = yx - K(1, mod);
            s.target[a][b] = yx;
            SparsePoly acc(mod);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    acc = acc + adj[a][i] * Q[i][j] *
                          (j == 0 ? x(1, b + 1) : x(2, b + 1));
            s.num[a][b] = poly_to_circuit(acc);
        }
    return s;
}

} // namespace th
