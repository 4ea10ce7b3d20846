#ifndef PHIGAMMA_IO_HPP
#define PHIGAMMA_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "phigamma/norms.hpp"
#include "phigamma/phimod.hpp"

namespace phigamma {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

// JSON codecs.  Scalars are {v, u, N} with u a decimal string; exact zero is
// u = "0", N = 0 and v its absolute precision.  Norm values are
// {exp_num, exp_den} for p^(-exp_num/exp_den), or "zero".  Files wrap one
// value as an object carrying "version" and "kind".

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
    fail("ParseError", where + ": " + what);
}

// Object view that remembers which keys were read, so leftovers can be rejected.
struct Fields {
    const json& j;
    std::string where;
    std::set<std::string> seen;

    Fields(const json& v, std::string w) : j(v), where(std::move(w)) {
        if (!j.is_object()) parse_fail(where, "expected an object");
    }
    std::string at(const std::string& k) const { return where + "." + k; }
    bool has(const std::string& k) {
        seen.insert(k);
        return j.contains(k) && !j.at(k).is_null();
    }
    const json& need(const std::string& k) {
        seen.insert(k);
        if (!j.contains(k)) parse_fail(where, "missing field '" + k + "'");
        return j.at(k);
    }
    i64 int_field(const std::string& k) {
        const json& v = need(k);
        if (!v.is_number_integer()) parse_fail(at(k), "expected an integer");
        return v.get<i64>();
    }
    std::string str_field(const std::string& k) {
        const json& v = need(k);
        if (!v.is_string()) parse_fail(at(k), "expected a string");
        return v.get<std::string>();
    }
    bool bool_field(const std::string& k) {
        const json& v = need(k);
        if (!v.is_boolean()) parse_fail(at(k), "expected a boolean");
        return v.get<bool>();
    }
    void done() const {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!seen.count(it.key())) parse_fail(where, "unknown field '" + it.key() + "'");
    }
};

inline i64 parse_int(const std::string& s, const std::string& where) {
    i64 x = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) parse_fail(where, "malformed integer key '" + s + "'");
    return x;
}

inline u64 parse_u64(const std::string& s, const std::string& where) {
    u64 x = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) parse_fail(where, "malformed decimal '" + s + "'");
    return x;
}

// "1,0,-2" -> {1, 0, -2}
inline Coords parse_coords_key(const std::string& s, size_t rank, const std::string& where) {
    Coords c;
    size_t pos = 0;
    while (true) {
        size_t e = s.find(',', pos);
        std::string part = s.substr(pos, e == std::string::npos ? std::string::npos : e - pos);
        i64 x = 0;
        auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
        if (part.empty() || ec != std::errc() || end != part.data() + part.size())
            parse_fail(where, "malformed exponent key '" + s + "'");
        c.push_back(x);
        if (e == std::string::npos) break;
        pos = e + 1;
    }
    if (c.size() != rank) parse_fail(where, "key '" + s + "' has " + std::to_string(c.size()) + " entries, expected " + std::to_string(rank));
    return c;
}

inline std::string coords_key(const Coords& c) {
    std::string s;
    for (size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
    return s;
}

inline bool is_prime(u64 p) {
    if (p < 2) return false;
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline u64 prime_field(Fields& f) {
    i64 p = f.int_field("p");
    if (p < 2 || !is_prime(u64(p))) parse_fail(f.at("p"), "not a prime: " + std::to_string(p));
    if (p > 1000003) parse_fail(f.at("p"), "prime too large for 62-bit residues");
    return u64(p);
}

inline int group_field(Fields& f) {
    std::string g = f.str_field("group");
    if (g == "GL2") return 2;
    if (g == "GL3") return 3;
    parse_fail(f.at("group"), "unknown group '" + g + "'");
}

inline std::string group_name(int n) { return n == 2 ? "GL2" : "GL3"; }

inline Rat rat_pair(Fields& f, const std::string& num, const std::string& den) {
    i64 a = f.int_field(num), b = f.int_field(den);
    if (b <= 0) parse_fail(f.at(den), "denominator must be positive");
    return Rat(a, b);
}

}  // namespace detail

// ---------------------------------------------------------------- scalars and norms

inline json to_json(const PadicScalar& s) {
    return json{{"v", s.v}, {"u", s.u_str()}, {"N", s.N}};
}

inline PadicScalar scalar_from_json(const json& j, u64 p, const std::string& where = "scalar") {
    detail::Fields f(j, where);
    i64 v = f.int_field("v");
    u64 u = detail::parse_u64(f.str_field("u"), f.at("u"));
    i64 N = f.int_field("N");
    f.done();
    if (N < 0 || N > 62) detail::parse_fail(f.at("N"), "precision out of range");
    if (N == 0) {
        if (u != 0) detail::parse_fail(f.at("u"), "zero precision carries no unit");
        return PadicScalar::zero_at(p, v);
    }
    if (u % p == 0) detail::parse_fail(f.at("u"), "unit residue divisible by p");
    if (u >= ipow(p, int(N))) detail::parse_fail(f.at("u"), "unit residue exceeds p^N");
    PadicScalar s;
    s.p = p; s.v = v; s.u = u; s.N = int(N); s.zero = false;
    return s;
}

inline json to_json(const NormValue& n) {
    if (n.is_zero) return "zero";
    return json{{"exp_num", n.e.num}, {"exp_den", n.e.den}};
}

inline NormValue norm_from_json(const json& j, const std::string& where = "norm") {
    if (j.is_string()) {
        if (j.get<std::string>() != "zero") detail::parse_fail(where, "expected \"zero\" or an exponent record");
        return NormValue::zero();
    }
    detail::Fields f(j, where);
    Rat e = detail::rat_pair(f, "exp_num", "exp_den");
    f.done();
    return NormValue::of_exp(e);
}

// ---------------------------------------------------------------- series

namespace detail {

inline void put_cert(json& j, const Cert& c) {
    j["class"] = cert_name(c.cls);
    if (c.radius) j["radius"] = json::array({c.radius->num, c.radius->den});
}

inline Cert read_cert(Fields& f) {
    Cert c;
    std::string name = f.str_field("class");
    try {
        c.cls = cert_from_name(name);
    } catch (const Error&) {
        parse_fail(f.at("class"), "unknown series class '" + name + "'");
    }
    if (f.has("radius")) {
        const json& r = f.need("radius");
        if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer() || r[1].get<i64>() <= 0)
            parse_fail(f.at("radius"), "expected [num, den] with den > 0");
        c.radius = Rat(r[0].get<i64>(), r[1].get<i64>());
    }
    return c;
}

}  // namespace detail

inline json to_json(const LaurentSeries& s) {
    json j;
    j["p"] = s.p;
    j["prec"] = s.prec;
    if (s.shift) j["shift"] = s.shift;
    j["window"] = json::array({s.lo, s.exact ? json(nullptr) : json(s.hi)});
    json c = json::object();
    for (size_t i = 0; i < s.c.size(); ++i)
        if (s.c[i]) c[std::to_string(s.lo + i64(i))] = to_json(s.coeff(s.lo + i64(i)));
    j["coeffs"] = c;
    detail::put_cert(j, s.cert);
    return j;
}

inline LaurentSeries series_from_json(const json& j, const std::string& where = "series") {
    detail::Fields f(j, where);
    LaurentSeries s;
    s.p = detail::prime_field(f);
    i64 prec = f.int_field("prec");
    if (prec < 0 || prec > 62) detail::parse_fail(f.at("prec"), "precision out of range");
    s.prec = int(prec);
    std::optional<i64> shift;
    if (f.has("shift")) {
        shift = f.int_field("shift");
        if (*shift < 0) detail::parse_fail(f.at("shift"), "shift must be >= 0");
    }
    const json& w = f.need("window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !(w[1].is_null() || w[1].is_number_integer()))
        detail::parse_fail(f.at("window"), "expected [lo, hi] with hi an integer or null");
    i64 lo = w[0].get<i64>();
    s.exact = w[1].is_null();
    s.hi = s.exact ? 0 : w[1].get<i64>();
    if (!s.exact && s.hi < lo) detail::parse_fail(f.at("window"), "hi below lo");
    const json& cj = f.need("coeffs");
    if (!cj.is_object()) detail::parse_fail(f.at("coeffs"), "expected an object keyed by exponent");
    std::map<i64, PadicScalar> coeffs;
    i64 minv = 0;
    for (auto it = cj.begin(); it != cj.end(); ++it) {
        std::string loc = f.at("coeffs") + "[" + it.key() + "]";
        i64 e = detail::parse_int(it.key(), f.at("coeffs"));
        if (!s.exact && (e < lo || e >= s.hi)) detail::parse_fail(loc, "exponent outside the window");
        PadicScalar a = scalar_from_json(it.value(), s.p, loc);
        if (!a.zero && a.abs_prec() < s.prec) detail::parse_fail(loc, "coefficient known to fewer digits than prec");
        if (!a.zero) minv = std::min(minv, a.v);
        coeffs.emplace(e, a);
    }
    s.shift = int(shift ? *shift : -minv);
    if (-minv > s.shift) detail::parse_fail(f.at("shift"), "coefficient valuation below -shift");
    s.cert = detail::read_cert(f);
    f.done();
    if (s.exact) {
        s.lo = coeffs.empty() ? 0 : coeffs.begin()->first;
        s.c.assign(coeffs.empty() ? 0 : size_t(coeffs.rbegin()->first - s.lo + 1), 0);
    } else {
        s.lo = lo;
        s.c.assign(size_t(s.hi - lo), 0);
    }
    u64 M = s.modulus();
    for (auto& [e, a] : coeffs) {
        if (a.zero || a.v + s.shift >= s.prec + s.shift) continue;
        u64 r = mulmod(a.u % M, ipow(s.p, int(a.v + s.shift)), M);
        s.c[size_t(e - s.lo)] = r;
    }
    s.normalize();
    return s;
}

// ---------------------------------------------------------------- torus and group elements

inline json to_json(const TorusElt& t) {
    json a = json::array();
    for (auto& x : t.d) a.push_back(to_json(x));
    return a;
}

inline TorusElt torus_from_json(const json& j, u64 p, const std::string& where = "torus") {
    if (!j.is_array() || j.empty()) detail::parse_fail(where, "expected a nonempty list of scalars");
    TorusElt t;
    for (size_t i = 0; i < j.size(); ++i) {
        auto s = scalar_from_json(j[i], p, where + "[" + std::to_string(i) + "]");
        if (s.zero) detail::parse_fail(where + "[" + std::to_string(i) + "]", "torus entries must be nonzero");
        t.d.push_back(s);
    }
    return t;
}

// coordinates in root order, with the level L of N_0(Z/p^L)
inline json to_json(const UnitriangularElt& g) {
    auto D = root_datum(g.n);
    json c = json::array();
    for (size_t r = 0; r < D.roots.size(); ++r) c.push_back(g.coord(D, int(r)));
    return json{{"group", detail::group_name(g.n)}, {"p", g.p}, {"level", g.L}, {"coords", c}};
}

inline UnitriangularElt unitriangular_from_json(const json& j, const std::string& where = "element") {
    detail::Fields f(j, where);
    int n = detail::group_field(f);
    u64 p = detail::prime_field(f);
    i64 L = f.int_field("level");
    if (L < 0) detail::parse_fail(f.at("level"), "level must be >= 0");
    const json& c = f.need("coords");
    auto D = root_datum(n);
    if (!c.is_array() || c.size() != D.roots.size()) detail::parse_fail(f.at("coords"), "wrong number of coordinates");
    UnitriangularElt g = unit_identity(p, int(L), n);
    for (size_t r = 0; r < D.roots.size(); ++r) {
        if (!c[r].is_number_integer()) detail::parse_fail(f.at("coords"), "coordinates must be integers");
        g.at(D.roots[r].first, D.roots[r].second) = c[r].get<i64>();
    }
    f.done();
    g.normalize();
    return g;
}

// ---------------------------------------------------------------- skew elements and modules

inline json to_json(const SkewElt& x) {
    json j;
    j["group"] = detail::group_name(x.q.n);
    j["p"] = x.q.p;
    j["level"] = x.q.k;
    j["prec"] = x.prec;
    detail::put_cert(j, x.cert);
    json terms = json::array();
    for (auto& [h, f] : x.terms) terms.push_back(json{{"key", json::array({h.y, h.z})}, {"series", to_json(f)}});
    j["terms"] = terms;
    return j;
}

inline SkewElt skew_from_json(const json& j, const std::string& where = "skew") {
    detail::Fields f(j, where);
    int n = detail::group_field(f);
    u64 p = detail::prime_field(f);
    i64 k = f.int_field("level");
    if (k < 1 || k > 30) detail::parse_fail(f.at("level"), "level out of range");
    i64 prec = f.int_field("prec");
    if (prec < 0 || prec > 62) detail::parse_fail(f.at("prec"), "precision out of range");
    SkewElt x = skew_zero(quotient_spec(n, p, int(k)), int(prec), detail::read_cert(f));
    const json& terms = f.need("terms");
    if (!terms.is_array()) detail::parse_fail(f.at("terms"), "expected a list");
    for (size_t i = 0; i < terms.size(); ++i) {
        std::string loc = f.at("terms") + "[" + std::to_string(i) + "]";
        detail::Fields t(terms[i], loc);
        const json& key = t.need("key");
        if (!key.is_array() || key.size() != 2 || !key[0].is_number_integer() || !key[1].is_number_integer())
            detail::parse_fail(t.at("key"), "expected [y, z]");
        i64 y = key[0].get<i64>(), z = key[1].get<i64>();
        if (y < 0 || z < 0 || u64(y) >= x.q.mod || u64(z) >= x.q.mod)
            detail::parse_fail(t.at("key"), "key is not a canonical residue modulo " + std::to_string(x.q.mod));
        LaurentSeries s = series_from_json(t.need("series"), t.at("series"));
        t.done();
        if (s.p != p) detail::parse_fail(t.at("series"), "series prime differs from the element prime");
        HKey h{u64(y), u64(z)};
        if (x.terms.count(h)) detail::parse_fail(t.at("key"), "duplicate key");
        if (!(s.exact && s.is_zero())) x.terms[h] = s;
    }
    f.done();
    return x;
}

inline json to_json(const SkewMat& m) {
    json rows = json::array();
    for (auto& row : m) {
        json r = json::array();
        for (auto& e : row) r.push_back(to_json(e));
        rows.push_back(r);
    }
    return rows;
}

inline SkewMat skewmat_from_json(const json& j, size_t d, const std::string& where) {
    if (!j.is_array() || j.size() != d) detail::parse_fail(where, "expected " + std::to_string(d) + " rows");
    SkewMat m;
    for (size_t i = 0; i < d; ++i) {
        std::string loc = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != d) detail::parse_fail(loc, "expected " + std::to_string(d) + " entries");
        std::vector<SkewElt> row;
        for (size_t c = 0; c < d; ++c) row.push_back(skew_from_json(j[i][c], loc + "[" + std::to_string(c) + "]"));
        m.push_back(row);
    }
    return m;
}

inline json to_json(const SkewModuleLevel& M) {
    json acts = json::object();
    for (auto& [name, C] : M.actions) acts[name] = to_json(C);
    return json{{"rank", M.d}, {"level", M.level}, {"phi_matrix", to_json(M.P)}, {"actions", acts}};
}

inline SkewModuleLevel module_from_json(const json& j, const std::string& where = "module") {
    detail::Fields f(j, where);
    SkewModuleLevel M;
    i64 d = f.int_field("rank");
    if (d < 1 || d > 16) detail::parse_fail(f.at("rank"), "rank out of range");
    M.d = size_t(d);
    i64 K = f.int_field("level");
    M.level = int(K);
    M.P = skewmat_from_json(f.need("phi_matrix"), M.d, f.at("phi_matrix"));
    for (size_t i = 0; i < M.d; ++i)
        for (size_t c = 0; c < M.d; ++c)
            if (M.P[i][c].q.k != K || M.P[i][c].q.p != M.P[0][0].q.p || M.P[i][c].q.n != M.P[0][0].q.n)
                detail::parse_fail(f.at("phi_matrix"), "entries disagree on group, prime or level");
    if (f.has("actions")) {
        const json& a = f.need("actions");
        if (!a.is_object()) detail::parse_fail(f.at("actions"), "expected an object keyed by t-descriptor");
        for (auto it = a.begin(); it != a.end(); ++it) {
            std::string loc = f.at("actions") + "[" + it.key() + "]";
            try {
                parse_t_descriptor(it.key(), M.P[0][0].q.p);
            } catch (const Error&) {
                detail::parse_fail(loc, "malformed t-descriptor key '" + it.key() + "'");
            }
            M.actions[it.key()] = skewmat_from_json(it.value(), M.d, loc);
        }
    }
    f.done();
    return M;
}

// ---------------------------------------------------------------- distributions

// rep "group": sparse delta coefficients; "monomial": box-dense b^k
// coefficients (true alpha exponents in keys); "both" stores the two and is
// cross-validated on reading.
inline json to_json(const DistElt& x) {
    json j;
    j["group"] = detail::group_name(x.D.n);
    j["p"] = x.p;
    j["L"] = x.L;
    j["N"] = x.N;
    j["neg"] = x.neg;
    j["rep"] = x.mono ? "both" : "group";
    json g = json::object();
    for (auto& [c, a] : x.g) g[detail::coords_key(c)] = std::to_string(a);
    j["group_terms"] = g;
    if (x.mono) {
        json m = json::object();
        for (auto& [k, a] : mono_terms(x)) m[detail::coords_key(k)] = std::to_string(a);
        j["monomials"] = json{{"box", x.mono->box}, {"complete", x.mono->complete}, {"coeffs", m}};
    }
    return j;
}

inline DistElt dist_from_json(const json& j, const std::string& where = "dist") {
    detail::Fields f(j, where);
    auto D = root_datum(detail::group_field(f));
    u64 p = detail::prime_field(f);
    i64 L = f.int_field("L"), N = f.int_field("N"), neg = f.int_field("neg");
    if (L < 0 || L > 40) detail::parse_fail(f.at("L"), "level out of range");
    if (N < 1 || N > 62) detail::parse_fail(f.at("N"), "precision out of range");
    if (neg < 0) detail::parse_fail(f.at("neg"), "neg must be >= 0");
    std::string rep = f.str_field("rep");
    if (rep != "group" && rep != "monomial" && rep != "both") detail::parse_fail(f.at("rep"), "unknown rep '" + rep + "'");
    DistElt x = dist_zero(D, p, int(L), int(N));
    x.neg = neg;
    u64 M = x.modulus();
    size_t R = D.roots.size();
    if (rep != "monomial") {
        const json& g = f.need("group_terms");
        if (!g.is_object()) detail::parse_fail(f.at("group_terms"), "expected an object keyed by coordinates");
        for (auto it = g.begin(); it != g.end(); ++it) {
            std::string loc = f.at("group_terms") + "[" + it.key() + "]";
            Coords c = detail::parse_coords_key(it.key(), R, f.at("group_terms"));
            if (!it.value().is_string()) detail::parse_fail(loc, "expected a decimal string");
            u64 a = detail::parse_u64(it.value().get<std::string>(), loc);
            if (a >= M) detail::parse_fail(loc, "coefficient exceeds p^N");
            if (detail::reduce_coords(c, p, int(L)) != c) detail::parse_fail(loc, "coordinates not reduced modulo p^L");
            detail::accumulate(x.g, c, a, M);
        }
    }
    if (rep != "group") {
        std::string mw = f.at("monomials");
        detail::Fields m(f.need("monomials"), mw);
        const json& box = m.need("box");
        if (!box.is_array() || box.size() != R) detail::parse_fail(m.at("box"), "box has the wrong rank");
        MonoCoords mc;
        for (auto& b : box) {
            if (!b.is_number_integer() || b.get<i64>() < 0 || b.get<i64>() > 4096) detail::parse_fail(m.at("box"), "bad box entry");
            mc.box.push_back(int(b.get<i64>()));
        }
        mc.complete = m.bool_field("complete");
        if (mc.size() > (size_t(1) << 24)) detail::parse_fail(m.at("box"), "box too large");
        mc.c.assign(mc.size(), 0);
        const json& cj = m.need("coeffs");
        if (!cj.is_object()) detail::parse_fail(m.at("coeffs"), "expected an object keyed by exponents");
        for (auto it = cj.begin(); it != cj.end(); ++it) {
            std::string loc = m.at("coeffs") + "[" + it.key() + "]";
            Coords k = detail::parse_coords_key(it.key(), R, m.at("coeffs"));
            k[size_t(D.alpha)] += neg;
            if (!mc.in_box(k)) detail::parse_fail(loc, "exponent outside the box");
            if (!it.value().is_string()) detail::parse_fail(loc, "expected a decimal string");
            u64 a = detail::parse_u64(it.value().get<std::string>(), loc);
            if (a >= M) detail::parse_fail(loc, "coefficient exceeds p^N");
            mc.c[mc.index(k)] = a;
        }
        m.done();
        x.mono = mc;
        if (rep == "monomial") {
            if (!mc.complete) detail::parse_fail(mw, "a monomial-only element must be complete");
            x = dist_convert(x, Rep::Group);
        } else {
            auto check = mahler_transform(x, mc.box);
            if (check.c != mc.c || check.complete != mc.complete)
                detail::parse_fail(mw, "monomial coordinates disagree with the group vector");
        }
    }
    f.done();
    return x;
}

// ---------------------------------------------------------------- regions and tables

inline json to_json(const Region& r) {
    return json{{"rho2_num", r.rho2.e.num}, {"rho2_den", r.rho2.e.den}, {"r", r.r}};
}

inline Region region_from_json(const json& j, const std::string& where = "region") {
    detail::Fields f(j, where);
    Region r;
    Rat e = detail::rat_pair(f, "rho2_num", "rho2_den");
    if (!(Rat(0) < e && e < Rat(1))) detail::parse_fail(where, "rho2 exponent must lie in (0,1)");
    r.rho2 = RhoExponent(e);
    r.r = f.int_field("r");
    f.done();
    return r;
}

inline json norm_row(i64 n, const NormValue& v) {
    json j{{"n", n}};
    if (v.is_zero) j["value"] = "zero";
    else { j["exp_num"] = v.e.num; j["exp_den"] = v.e.den; }
    return j;
}

// ---------------------------------------------------------------- documents

inline json make_document(const std::string& kind, const json& body) {
    json d{{"version", kFormatVersion}, {"kind", kind}};
    for (auto it = body.begin(); it != body.end(); ++it) d[it.key()] = it.value();
    return d;
}

// Checks the version tag and kind, returns the body.
inline json open_document(const json& d, const std::string& kind, const std::string& where = "document") {
    if (!d.is_object()) detail::parse_fail(where, "expected an object");
    if (!d.contains("version")) detail::parse_fail(where, "missing field 'version'");
    if (!d.at("version").is_number_integer() || d.at("version").get<i64>() != kFormatVersion)
        detail::parse_fail(where + ".version", "unsupported version " + d.at("version").dump());
    if (!d.contains("kind") || !d.at("kind").is_string()) detail::parse_fail(where, "missing field 'kind'");
    if (d.at("kind").get<std::string>() != kind)
        detail::parse_fail(where + ".kind", "expected '" + kind + "', got '" + d.at("kind").get<std::string>() + "'");
    json body = d;
    body.erase("version");
    body.erase("kind");
    return body;
}

inline std::string document_kind(const json& d, const std::string& where = "document") {
    if (!d.is_object() || !d.contains("kind") || !d.at("kind").is_string()) detail::parse_fail(where, "missing field 'kind'");
    return d.at("kind").get<std::string>();
}

inline json parse_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        detail::parse_fail(where + " at byte " + std::to_string(e.byte), "malformed JSON");
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("ParseError", path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

// write to a sibling temporary, then rename over the target
inline void write_file_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail("PreconditionFailed", "cannot write " + tmp);
        out << text;
        if (!out) fail("PreconditionFailed", "short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) fail("PreconditionFailed", "cannot rename onto " + path);
}

}  // namespace phigamma

#endif
