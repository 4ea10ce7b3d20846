#ifndef PHIGAMMA_PHIMOD_HPP
#define PHIGAMMA_PHIMOD_HPP

#include <functional>
#include <map>
#include <string>

#include "phigamma/skewring.hpp"

namespace phigamma {

using SerMat = std::vector<std::vector<LaurentSeries>>;
using SkewMat = std::vector<std::vector<SkewElt>>;

// ---------------------------------------------------------------- series matrices

inline SerMat sermat_identity(u64 p, int prec, size_t d, Cert cert = {}) {
    SerMat m(d, std::vector<LaurentSeries>(d, with_cert(ser_zero(p, prec), cert)));
    for (size_t i = 0; i < d; ++i) m[i][i] = with_cert(ser_one(p, prec), cert);
    return m;
}

inline SerMat sermat_mul(const SerMat& a, const SerMat& b) {
    size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    if (!a.empty() && a[0].size() != k) fail("PreconditionFailed", "matrix shapes do not match");
    SerMat r(n, std::vector<LaurentSeries>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) {
            LaurentSeries acc = with_cert(ser_zero(a[i][0].p, a[i][0].prec), a[i][0].cert);
            for (size_t l = 0; l < k; ++l) acc = acc + a[i][l] * b[l][j];
            r[i][j] = acc;
        }
    return r;
}

inline bool sermat_agree(const SerMat& a, const SerMat& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (size_t j = 0; j < a[i].size(); ++j)
            if (!ser_agree(a[i][j], b[i][j])) return false;
    }
    return true;
}

inline SerMat sermat_apply(const SerMat& a, const std::function<LaurentSeries(const LaurentSeries&)>& f) {
    SerMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = f(e);
    return r;
}

// Gauss-Jordan over the coefficient class of the entries; pivots must be units there
inline SerMat sermat_inverse(const SerMat& a) {
    size_t d = a.size();
    if (d == 0) return {};
    SerMat m = a;
    SerMat inv = sermat_identity(a[0][0].p, a[0][0].prec + a[0][0].shift, d, a[0][0].cert);
    for (size_t col = 0; col < d; ++col) {
        size_t piv = d;
        LaurentSeries pinv;
        for (size_t r = col; r < d && piv == d; ++r) {
            if (m[r][col].is_zero()) continue;
            try {
                pinv = ser_invert(m[r][col]);
                piv = r;
            } catch (const Error&) {
            }
        }
        if (piv == d) fail("NotEtale", "no invertible pivot in column " + std::to_string(col));
        std::swap(m[col], m[piv]);
        std::swap(inv[col], inv[piv]);
        for (size_t j = 0; j < d; ++j) {
            m[col][j] = pinv * m[col][j];
            inv[col][j] = pinv * inv[col][j];
        }
        for (size_t r = 0; r < d; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            LaurentSeries f = m[r][col];
            for (size_t j = 0; j < d; ++j) {
                m[r][j] = m[r][j] - f * m[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    return inv;
}

// ---------------------------------------------------------------- skew matrices

inline SkewMat skewmat_zero(const QuotientSpec& q, int prec, size_t d, Cert cert = {}) {
    return SkewMat(d, std::vector<SkewElt>(d, skew_zero(q, prec, cert)));
}

inline SkewMat skewmat_identity(const QuotientSpec& q, int prec, size_t d, Cert cert = {}) {
    SkewMat m = skewmat_zero(q, prec, d, cert);
    for (size_t i = 0; i < d; ++i) m[i][i] = skew_one(q, prec, cert);
    return m;
}

inline SkewMat skewmat_add(const SkewMat& a, const SkewMat& b) {
    SkewMat r = a;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
    return r;
}

inline SkewMat skewmat_neg(const SkewMat& a) {
    SkewMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = skew_neg(e);
    return r;
}

inline SkewMat skewmat_sub(const SkewMat& a, const SkewMat& b) { return skewmat_add(a, skewmat_neg(b)); }

inline SkewMat skewmat_mul(const SkewMat& a, const SkewMat& b) {
    size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    SkewMat r(n, std::vector<SkewElt>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) {
            SkewElt acc = skew_zero(a[i][0].q, a[i][0].prec, a[i][0].cert);
            for (size_t l = 0; l < k; ++l) acc = acc + skew_mul(a[i][l], b[l][j]);
            r[i][j] = acc;
        }
    return r;
}

inline SkewMat skewmat_phi(const SkewMat& a) {
    SkewMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = skew_phi(e);
    return r;
}

inline SkewMat skewmat_reduce(const SkewMat& a, int k) {
    SkewMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = reduce_level(e, k);
    return r;
}

inline bool skewmat_is_zero(const SkewMat& a) {
    for (auto& row : a)
        for (auto& e : row)
            if (!skew_is_zero(e)) return false;
    return true;
}

inline bool skewmat_agree(const SkewMat& a, const SkewMat& b) { return skewmat_is_zero(skewmat_sub(a, b)); }

inline bool skewmat_in_ideal(const SkewMat& a, int k) {
    for (auto& row : a)
        for (auto& e : row)
            if (!ideal_member(e, k)) return false;
    return true;
}

// iota: series matrix -> skew matrix at key 1
inline SkewMat skewmat_iota(const SerMat& a, const QuotientSpec& q) {
    SkewMat r(a.size());
    for (size_t i = 0; i < a.size(); ++i)
        for (auto& e : a[i]) {
            SkewElt x = skew_zero(q, e.prec, e.cert);
            skew_put(x, {0, 0}, e);
            r[i].push_back(x);
        }
    return r;
}

// ell: augmentation to the series ring
inline SerMat skewmat_ell(const SkewMat& a) {
    SerMat r(a.size());
    for (size_t i = 0; i < a.size(); ++i)
        for (auto& e : a[i]) {
            auto red = reduce_level(e, 1);
            auto it = red.terms.find(HKey{0, 0});
            r[i].push_back(it == red.terms.end() ? with_cert(ser_zero(e.p(), e.prec), e.cert) : it->second);
        }
    return r;
}

inline bool skewmat_is_iota_form(const SkewMat& a) {
    for (auto& row : a)
        for (auto& e : row)
            for (auto& [h, f] : e.terms)
                if (!(h == HKey{0, 0})) return false;
    return true;
}

// phi_t on the skew ring: coefficients by the T+ action on series, keys by
// (y, z) -> (beta(t) y, gamma(t) z)
inline SkewElt skew_phi_t(const RootDatum& D, const TorusElt& t, const SkewElt& x) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "t is not in T+");
    const QuotientSpec& q = x.q;
    u64 by = 0, bz = 0;
    if (!q.trivial()) {
        int digits = q.k - 1;
        by = root_eval(D, kBeta, t).value.residue(digits) % q.mod;
        bz = root_eval(D, kGamma, t).value.residue(digits) % q.mod;
    }
    SkewElt out = skew_zero(q, x.prec, x.cert);
    for (auto& [h, f] : x.terms) {
        HKey img = q.trivial() ? h : HKey{mulmod(h.y, by, q.mod), mulmod(h.z, bz, q.mod)};
        skew_put(out, img, tplus_act_series(D, t, f));
    }
    return out;
}

inline SkewMat skewmat_phi_t(const RootDatum& D, const TorusElt& t, const SkewMat& a) {
    SkewMat r = a;
    for (auto& row : r)
        for (auto& e : row) e = skew_phi_t(D, t, e);
    return r;
}

// ---------------------------------------------------------------- modules

struct SeriesModule {
    size_t d = 0;
    SerMat A;                                 // phi(e_i) = sum_j A[i][j] e_j
    std::map<std::string, SerMat> actions;    // "gamma:a" -> matrix of gamma_a
};

struct SkewModuleLevel {
    size_t d = 0;
    int level = 1;
    SkewMat P;                                // P = A + B
    std::map<std::string, SkewMat> actions;   // "t:v0,v1,v2" -> matrix of phi_t
};

inline SkewMat module_A(const SkewModuleLevel& M) { return skewmat_iota(skewmat_ell(M.P), M.P[0][0].q); }
inline SkewMat module_B(const SkewModuleLevel& M) { return skewmat_sub(M.P, module_A(M)); }

inline SeriesModule functor_D(const SkewModuleLevel& M) {
    SeriesModule D;
    D.d = M.d;
    D.A = skewmat_ell(M.P);
    (void)sermat_inverse(D.A);  // NotEtale when the augmented matrix is singular
    return D;
}

inline SkewModuleLevel functor_M(const SeriesModule& D, const QuotientSpec& q) {
    SkewModuleLevel M;
    M.d = D.d;
    M.level = q.k;
    M.P = skewmat_iota(D.A, q);
    return M;
}

struct EtaleReport {
    bool ok = false;
    std::string diagnostic;
};

inline EtaleReport etale_check(const SerMat& a) {
    try {
        SerMat inv = sermat_inverse(a);
        SerMat prod = sermat_mul(a, inv);
        if (!sermat_agree(prod, sermat_identity(a[0][0].p, a[0][0].prec, a.size(), a[0][0].cert)))
            return {false, "inverse residual is nonzero"};
        return {true, ""};
    } catch (const Error& e) {
        return {false, e.code + ": " + e.what()};
    }
}

inline EtaleReport etale_check(const SeriesModule& D) { return etale_check(D.A); }
inline EtaleReport etale_check(const SkewModuleLevel& M) { return etale_check(skewmat_ell(M.P)); }

// gamma_a o phi = phi o gamma_a in matrix form: phi(G) A = gamma_a(A) G
inline bool gamma_commutes(const SeriesModule& D, i64 a) {
    auto it = D.actions.find("gamma:" + std::to_string(a));
    if (it == D.actions.end()) fail("PreconditionFailed", "gamma action not tracked");
    const SerMat& G = it->second;
    SerMat lhs = sermat_mul(sermat_apply(G, [](const LaurentSeries& f) { return frobenius_series(f, 1); }), D.A);
    SerMat rhs = sermat_mul(sermat_apply(D.A, [a](const LaurentSeries& f) { return gamma_act(a, f); }), G);
    return sermat_agree(lhs, rhs);
}

// ---------------------------------------------------------------- X and Y

struct SeriesSolution {
    SkewMat sum;
    std::vector<SkewMat> terms;
};

namespace detail {

inline void check_solver_input(const SkewMat& A, const SkewMat& B, int K) {
    if (A.empty() || A.size() != B.size()) fail("PreconditionFailed", "A and B must be square of equal size");
    if (K < 2) fail("LevelTooSmall", "level 1 carries no information beyond the series module");
    for (auto& row : A)
        for (auto& e : row)
            if (e.q.k != K) fail("PreconditionFailed", "A is not given at the target level");
    if (!skewmat_is_iota_form(A)) fail("PreconditionFailed", "A must lie in iota(R)");
    if (!skewmat_in_ideal(B, 1)) fail("PreconditionFailed", "B must have entries in I_1");
}

inline SkewMat iterate_phi(SkewMat m, int k) {
    for (int i = 0; i < k; ++i) m = skewmat_phi(m);
    return m;
}

}  // namespace detail

inline SkewMat skew_A_inverse(const SkewMat& A) {
    return skewmat_iota(sermat_inverse(skewmat_ell(A)), A[0][0].q);
}

// Newton iteration Z <- Z (2 - P Z) from Z = A^-1; the error 1 - PZ lies in I_1 and
// is nilpotent at a finite level, so the iteration ends with an exact inverse
inline SkewMat skew_inverse(const SkewMat& A, const SkewMat& P, int max_steps = 12) {
    const QuotientSpec& q = P[0][0].q;
    int prec = P[0][0].prec;
    size_t d = P.size();
    SkewMat I = skewmat_identity(q, prec, d, P[0][0].cert);
    SkewMat Z = skew_A_inverse(A);
    for (int step = 0; step <= max_steps; ++step) {
        SkewMat E = skewmat_sub(I, skewmat_mul(P, Z));
        if (skewmat_is_zero(E)) return Z;
        Z = skewmat_add(Z, skewmat_mul(Z, E));
    }
    fail("NotEtale", "Newton iteration for (A+B)^-1 did not terminate");
}

// X = sum_k A^-1 phi(A^-1)...phi^(k-1)(A^-1) phi^k(A^-1 B) phi^(k-1)(A+B)...(A+B), k < K-1
inline SeriesSolution solve_X(const SkewMat& A, const SkewMat& B, int K) {
    detail::check_solver_input(A, B, K);
    SkewMat Ainv = skew_A_inverse(A);
    SkewMat P = skewmat_add(A, B);
    SkewMat C = skewmat_mul(Ainv, B);
    SeriesSolution sol;
    sol.sum = skewmat_zero(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat L = skewmat_identity(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat R = L;
    SkewMat phiAinv = Ainv, phiP = P, phiC = C;
    for (int k = 0; k < K - 1; ++k) {
        SkewMat term = skewmat_mul(skewmat_mul(L, phiC), R);
        sol.terms.push_back(term);
        sol.sum = skewmat_add(sol.sum, term);
        L = skewmat_mul(L, phiAinv);
        R = skewmat_mul(phiP, R);
        phiAinv = skewmat_phi(phiAinv);
        phiP = skewmat_phi(phiP);
        phiC = skewmat_phi(phiC);
    }
    return sol;
}

// Y = -sum_k Q phi(Q)...phi^(k-1)(Q) phi^k(Q B) phi^(k-1)(A)...A with Q = (A+B)^-1
inline SeriesSolution solve_Y(const SkewMat& A, const SkewMat& B, int K) {
    detail::check_solver_input(A, B, K);
    SkewMat P = skewmat_add(A, B);
    SkewMat Q = skew_inverse(A, P);
    SkewMat C = skewmat_mul(Q, B);
    SeriesSolution sol;
    sol.sum = skewmat_zero(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat L = skewmat_identity(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat R = L;
    SkewMat phiQ = Q, phiA = A, phiC = C;
    for (int k = 0; k < K - 1; ++k) {
        SkewMat term = skewmat_neg(skewmat_mul(skewmat_mul(L, phiC), R));
        sol.terms.push_back(term);
        sol.sum = skewmat_add(sol.sum, term);
        L = skewmat_mul(L, phiQ);
        R = skewmat_mul(phiA, R);
        phiQ = skewmat_phi(phiQ);
        phiA = skewmat_phi(phiA);
        phiC = skewmat_phi(phiC);
    }
    return sol;
}

// phi(id+X)(A+B) - A(id+X)
inline SkewMat x_residual(const SkewMat& A, const SkewMat& B, const SkewMat& X) {
    SkewMat I = skewmat_identity(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat IX = skewmat_add(I, X);
    return skewmat_sub(skewmat_mul(skewmat_phi(IX), skewmat_add(A, B)), skewmat_mul(A, IX));
}

// (A+B)(id+Y) - phi(id+Y)A
inline SkewMat y_residual(const SkewMat& A, const SkewMat& B, const SkewMat& Y) {
    SkewMat I = skewmat_identity(A[0][0].q, A[0][0].prec, A.size(), A[0][0].cert);
    SkewMat IY = skewmat_add(I, Y);
    return skewmat_sub(skewmat_mul(skewmat_add(A, B), IY), skewmat_mul(skewmat_phi(IY), A));
}

struct ThetaReport {
    bool ok = true;
    bool x_equation = true;
    std::map<std::string, bool> actions;   // per tracked t: phi_t in the basis eta is iota of its augmentation
};

inline TorusElt parse_t_descriptor(const std::string& s, u64 p) {
    if (s.rfind("t:", 0) != 0) fail("ParseError", "t-descriptor must start with 't:'");
    std::vector<i64> vals;
    size_t pos = 2;
    while (pos <= s.size()) {
        size_t e = s.find(',', pos);
        if (e == std::string::npos) e = s.size();
        try {
            vals.push_back(std::stoll(s.substr(pos, e - pos)));
        } catch (const std::exception&) {
            fail("ParseError", "bad valuation in t-descriptor '" + s + "'");
        }
        pos = e + 1;
    }
    return torus_from_vals(p, vals);
}

// eta = (id+X) e: phi(eta) = A eta, and for each tracked t the matrix of phi_t
// in the basis eta equals iota(ell(C)) at the level of M
inline ThetaReport theta_verify(const SkewModuleLevel& M, const SkewMat& X) {
    ThetaReport rep;
    SkewMat A = module_A(M), B = module_B(M);
    rep.x_equation = skewmat_is_zero(x_residual(A, B, X));
    rep.ok = rep.x_equation;
    if (M.actions.empty()) return rep;
    auto D = root_datum(3);
    const QuotientSpec& q = M.P[0][0].q;
    SkewMat I = skewmat_identity(q, M.P[0][0].prec, M.d, M.P[0][0].cert);
    SkewMat IX = skewmat_add(I, X);
    SkewMat IXinv = skew_inverse(I, IX);
    for (auto& [name, C] : M.actions) {
        TorusElt t = parse_t_descriptor(name, q.p);
        // phi_t(eta) = phi_t(id+X) C (id+X)^-1 eta
        SkewMat Ct = skewmat_mul(skewmat_mul(skewmat_phi_t(D, t, IX), C), IXinv);
        bool ok = skewmat_agree(Ct, skewmat_iota(skewmat_ell(C), q));
        rep.actions[name] = ok;
        rep.ok = rep.ok && ok;
    }
    return rep;
}

}  // namespace phigamma

#endif
