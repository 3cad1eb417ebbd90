#include "fractlab/poly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace fractlab::poly {

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (int i = 1; i <= k; ++i) {
        long long num = 0;
        if (__builtin_mul_overflow(r, static_cast<long long>(n - k + i), &num))
            throw ResourceError("binomial overflow");
        r = num / i;
    }
    return r;
}

namespace {

void gen_indices(int vars, int order, std::vector<int>& cur, int pos, int remaining,
                 std::vector<std::vector<int>>& out) {
    if (pos == vars) {
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        cur[static_cast<std::size_t>(pos)] = v;
        gen_indices(vars, order, cur, pos + 1, remaining - v, out);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
}

MultiIndexSet build_set(int vars, int order) {
    if (vars < 0 || order < 0) throw ContractError("multi_index_set: negative arguments");
    MultiIndexSet s;
    s.vars = vars;
    s.order = order;
    std::vector<int> cur(static_cast<std::size_t>(vars), 0);
    gen_indices(vars, order, cur, 0, order, s.indices);
    std::sort(s.indices.begin(), s.indices.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
        int da = 0, db = 0;
        for (int v : a) da += v;
        for (int v : b) db += v;
        if (da != db) return da < db;
        return a < b;
    });
    s.degrees.reserve(s.indices.size());
    for (const auto& mi : s.indices) {
        int d = 0;
        for (int v : mi) d += v;
        s.degrees.push_back(d);
    }
    const int n = s.count();
    s.sum.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    std::map<std::vector<int>, int> lookup;
    for (int i = 0; i < n; ++i) lookup[s.indices[static_cast<std::size_t>(i)]] = i;
    std::vector<int> tmp(static_cast<std::size_t>(vars));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (s.degrees[static_cast<std::size_t>(i)] + s.degrees[static_cast<std::size_t>(j)] > order)
                continue;
            for (int v = 0; v < vars; ++v)
                tmp[static_cast<std::size_t>(v)] = s.indices[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] +
                                                   s.indices[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
            s.sum[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = lookup.at(tmp);
        }
    }
    return s;
}

} // namespace

int MultiIndexSet::index_of(const std::vector<int>& mi) const {
    for (int i = 0; i < count(); ++i)
        if (indices[static_cast<std::size_t>(i)] == mi) return i;
    return -1;
}

const MultiIndexSet& multi_index_set(int vars, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, MultiIndexSet> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(vars, order);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_set(vars, order)).first;
    return it->second;
}

TruncPoly TruncPoly::variable(const MultiIndexSet& s, int var, double base) {
    if (var < 0 || var >= s.vars) throw ContractError("TruncPoly::variable out of range");
    TruncPoly p(s);
    p.c[0] = base;
    if (s.order >= 1) {
        std::vector<int> mi(static_cast<std::size_t>(s.vars), 0);
        mi[static_cast<std::size_t>(var)] = 1;
        p.c[static_cast<std::size_t>(s.index_of(mi))] = 1.0;
    }
    return p;
}

TruncPoly& TruncPoly::operator+=(const TruncPoly& o) {
    if (set != o.set) throw ContractError("TruncPoly: mixed index sets");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
}

TruncPoly& TruncPoly::operator-=(const TruncPoly& o) {
    if (set != o.set) throw ContractError("TruncPoly: mixed index sets");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
}

TruncPoly& TruncPoly::operator*=(double k) {
    for (double& v : c) v *= k;
    return *this;
}

TruncPoly operator*(const TruncPoly& a, const TruncPoly& b) {
    if (a.set != b.set) throw ContractError("TruncPoly: mixed index sets");
    const MultiIndexSet& s = *a.set;
    TruncPoly out(s);
    const int n = s.count();
    for (int i = 0; i < n; ++i) {
        const double ai = a.c[static_cast<std::size_t>(i)];
        if (ai == 0.0) continue;
        const auto& row = s.sum[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const int t = row[static_cast<std::size_t>(j)];
            if (t < 0) continue;
            out.c[static_cast<std::size_t>(t)] += ai * b.c[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

double TruncPoly::eval(const std::vector<double>& x) const {
    if (!set) throw ContractError("TruncPoly: empty");
    if (static_cast<int>(x.size()) != set->vars) throw ContractError("TruncPoly::eval: wrong arity");
    double acc = 0.0;
    for (int i = 0; i < set->count(); ++i) {
        double term = c[static_cast<std::size_t>(i)];
        if (term == 0.0) continue;
        const auto& mi = set->indices[static_cast<std::size_t>(i)];
        for (int v = 0; v < set->vars; ++v)
            for (int rep = 0; rep < mi[static_cast<std::size_t>(v)]; ++rep) term *= x[static_cast<std::size_t>(v)];
        acc += term;
    }
    return acc;
}

double multi_factorial(const std::vector<int>& mi) {
    double f = 1.0;
    for (int v : mi)
        for (int i = 2; i <= v; ++i) f *= static_cast<double>(i);
    return f;
}

XSeries split_joint(const TruncPoly& joint, int d, int order) {
    if (!joint.set || joint.set->vars != d + 1)
        throw ContractError("split_joint: joint polynomial must have d+1 variables");
    const MultiIndexSet& qset = multi_index_set(d, order);
    XSeries out;
    out.by_xpow.assign(static_cast<std::size_t>(order) + 1, TruncPoly(qset));
    const MultiIndexSet& js = *joint.set;
    std::vector<int> qmi(static_cast<std::size_t>(d));
    for (int i = 0; i < js.count(); ++i) {
        const double v = joint.c[static_cast<std::size_t>(i)];
        if (v == 0.0) continue;
        const auto& mi = js.indices[static_cast<std::size_t>(i)];
        const int xp = mi[static_cast<std::size_t>(d)];
        for (int k = 0; k < d; ++k) qmi[static_cast<std::size_t>(k)] = mi[static_cast<std::size_t>(k)];
        const int qi = qset.index_of(qmi);
        if (xp > order || qi < 0) throw InvariantError("split_joint: index out of truncation range");
        out.by_xpow[static_cast<std::size_t>(xp)].c[static_cast<std::size_t>(qi)] += v;
    }
    return out;
}

} // namespace fractlab::poly
