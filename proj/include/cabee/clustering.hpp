#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cabee/env.hpp"

namespace cabee {

enum class DivergenceKind { SquaredEuclidean, KullbackLeibler, SquaredMean };

struct Divergence {
    DivergenceKind kind = DivergenceKind::SquaredEuclidean;
    // action values used by SquaredMean
    std::vector<double> values;

    static Divergence l2() { return {DivergenceKind::SquaredEuclidean, {}}; }
    static Divergence kl() { return {DivergenceKind::KullbackLeibler, {}}; }
    static Divergence mean(std::vector<double> v) { return {DivergenceKind::SquaredMean, std::move(v)}; }

    // Same kind, with values taken from the given action set when needed.
    Divergence for_actions(const std::vector<double>& v) const {
        Divergence d = *this;
        if (kind == DivergenceKind::SquaredMean && d.values.empty()) d.values = v;
        return d;
    }
};

inline const char* divergence_name(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::SquaredEuclidean: return "l2";
        case DivergenceKind::KullbackLeibler: return "kl";
        case DivergenceKind::SquaredMean: return "mean";
    }
    return "?";
}

inline DivergenceKind parse_divergence(const std::string& s) {
    if (s == "l2" || s == "squared-euclidean") return DivergenceKind::SquaredEuclidean;
    if (s == "kl" || s == "kullback-leibler") return DivergenceKind::KullbackLeibler;
    if (s == "mean" || s == "squared-mean-difference") return DivergenceKind::SquaredMean;
    throw Error("unknown divergence '" + s + "'");
}

inline double mean_of(const Mixed& p, const std::vector<double>& values) {
    if (values.size() != p.size()) throw Error("mean divergence needs one real value per action");
    double m = 0;
    for (std::size_t a = 0; a < p.size(); ++a) m += p[a] * values[a];
    return m;
}

// Infinity signals a KL support violation.
inline double divergence_eval(const Divergence& d, const Mixed& p, const Mixed& q) {
    if (p.size() != q.size()) throw Error("divergence arguments differ in size");
    switch (d.kind) {
        case DivergenceKind::SquaredEuclidean: {
            double s = 0;
            for (std::size_t a = 0; a < p.size(); ++a) s += (p[a] - q[a]) * (p[a] - q[a]);
            return s;
        }
        case DivergenceKind::KullbackLeibler: {
            double s = 0;
            for (std::size_t a = 0; a < p.size(); ++a) {
                if (p[a] <= 0) continue;
                if (q[a] <= 0) return std::numeric_limits<double>::infinity();
                s += p[a] * std::log(p[a] / q[a]);
            }
            return std::max(s, 0.0);
        }
        case DivergenceKind::SquaredMean: {
            double m = mean_of(p, d.values) - mean_of(q, d.values);
            return m * m;
        }
    }
    return 0;
}

// Prior-weighted mean of the class members.
inline Mixed prototype(const std::vector<Mixed>& data, const std::vector<std::size_t>& cls,
                       const std::vector<double>& prior) {
    if (cls.empty()) throw Error("prototype of an empty class");
    Mixed m(data[cls.front()].size(), 0.0);
    double w = 0;
    for (auto g : cls) {
        w += prior[g];
        for (std::size_t a = 0; a < m.size(); ++a) m[a] += prior[g] * data[g][a];
    }
    for (double& v : m) v /= w;
    return m;
}

inline std::vector<Mixed> prototypes(const std::vector<Mixed>& data, const Partition& part,
                                     const std::vector<double>& prior) {
    std::vector<Mixed> out;
    for (const auto& c : part.classes()) out.push_back(prototype(data, c, prior));
    return out;
}

// Sum over games of p(w) d(data_w, prototype of its class).
inline double dispersion(const std::vector<Mixed>& data, const Partition& part, const std::vector<double>& prior,
                         const Divergence& d) {
    auto protos = prototypes(data, part, prior);
    double s = 0;
    for (std::size_t g = 0; g < data.size(); ++g)
        s += prior[g] * divergence_eval(d, data[g], protos[std::size_t(part.label[g])]);
    return s;
}

struct LocalWitness {
    std::size_t game = 0;
    int better_class = 0;
    double gap = 0;  // own distance minus better distance
};

struct LocalCheck {
    bool ok = true;
    std::optional<LocalWitness> witness;
    double margin = std::numeric_limits<double>::infinity();  // min over games of (best other - own)
    explicit operator bool() const { return ok; }
};

inline constexpr double kLocalTieTol = 1e-12;

inline LocalCheck is_locally_clustered(const std::vector<Mixed>& data, const Partition& part,
                                       const std::vector<double>& prior, const Divergence& d,
                                       double tol = kLocalTieTol) {
    LocalCheck out;
    auto protos = prototypes(data, part, prior);
    for (std::size_t g = 0; g < data.size(); ++g) {
        double own = divergence_eval(d, data[g], protos[std::size_t(part.label[g])]);
        for (int c = 0; c < int(protos.size()); ++c) {
            if (c == part.label[g]) continue;
            double other = divergence_eval(d, data[g], protos[std::size_t(c)]);
            double slack = (std::isinf(own) && std::isinf(other)) ? 0.0 : other - own;
            out.margin = std::min(out.margin, slack);
            if (slack < -tol && (!out.witness || -slack > out.witness->gap)) {
                out.ok = false;
                out.witness = LocalWitness{g, c, -slack};
            }
        }
    }
    return out;
}

inline constexpr std::size_t kEnumerationCap = 14;

// Restricted-growth strings with at most K distinct labels, in lexicographic order.
class PartitionEnumerator {
public:
    PartitionEnumerator(std::size_t n, int K, std::size_t cap = kEnumerationCap) : n_(n), K_(K) {
        if (n == 0 || K < 1) throw Error("enumerate_partitions needs n >= 1 and K >= 1");
        if (n > cap)
            throw SizeError("enumeration of " + std::to_string(n) + " games exceeds cap " + std::to_string(cap));
        a_.assign(n, 0);
        b_.assign(n, 1);  // b_[k] = 1 + max(a_[0..k-1])
    }

    Partition current() const { return Partition(a_, K_); }

    bool next() {
        for (std::size_t k = n_; k-- > 1;) {
            if (a_[k] < b_[k] && a_[k] + 1 < K_) {
                ++a_[k];
                int m = std::max(b_[k], a_[k] + 1);
                for (std::size_t t = k + 1; t < n_; ++t) {
                    a_[t] = 0;
                    b_[t] = m;
                }
                return true;
            }
        }
        return false;
    }

private:
    std::size_t n_;
    int K_;
    std::vector<int> a_, b_;
};

inline void for_each_partition(std::size_t n, int K, const std::function<void(const Partition&)>& fn,
                               std::size_t cap = kEnumerationCap) {
    PartitionEnumerator e(n, K, cap);
    do fn(e.current());
    while (e.next());
}

inline std::vector<Partition> enumerate_partitions(std::size_t n, int K, std::size_t cap = kEnumerationCap) {
    std::vector<Partition> out;
    for_each_partition(n, K, [&](const Partition& p) { out.push_back(p); }, cap);
    return out;
}

inline constexpr double kGlobalTieTol = 1e-10;

struct GlobalClustering {
    std::vector<Partition> minimizers;
    double dispersion = 0;
};

inline GlobalClustering global_cluster(const std::vector<Mixed>& data, const std::vector<double>& prior, int K,
                                       const Divergence& d, double tie_tol = kGlobalTieTol) {
    std::vector<std::pair<double, Partition>> all;
    double best = std::numeric_limits<double>::infinity();
    for_each_partition(data.size(), K, [&](const Partition& p) {
        double v = dispersion(data, p, prior, d);
        if (v <= best + tie_tol) all.emplace_back(v, p);
        best = std::min(best, v);
    });
    GlobalClustering out;
    out.dispersion = best;
    for (auto& [v, p] : all)
        if (v <= best + tie_tol) out.minimizers.push_back(p);
    return out;
}

inline bool is_globally_clustered(const std::vector<Mixed>& data, const Partition& part,
                                  const std::vector<double>& prior, const Divergence& d,
                                  double tie_tol = kGlobalTieTol) {
    double own = dispersion(data, part, prior, d);
    bool ok = true;
    for_each_partition(data.size(), part.capacity, [&](const Partition& p) {
        if (ok && dispersion(data, p, prior, d) < own - tie_tol) ok = false;
    });
    return ok;
}

struct ClusteringReport {
    Partition partition;
    std::vector<Mixed> prototypes;
    double dispersion = 0;
    bool locally_clustered = false;
    std::optional<bool> globally_clustered;
    std::vector<double> history;      // dispersion after each assignment + mean round
    std::vector<std::string> events;  // e.g. dropped classes
    int rounds = 0;                   // rounds that changed an assignment
};

inline ClusteringReport kmeans_lloyd(const std::vector<Mixed>& data, const std::vector<double>& prior, int K,
                                     const Divergence& d, std::vector<Mixed> init, int max_rounds = 10000) {
    if (init.empty() || K < 1) throw Error("kmeans_lloyd needs at least one initial representative");
    if (int(init.size()) > K) init.resize(std::size_t(K));
    const std::size_t n = data.size();
    std::vector<int> assign(n, -1);
    std::vector<Mixed> reps = std::move(init);
    ClusteringReport rep;
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        for (std::size_t g = 0; g < n; ++g) {
            // ties keep the current class, otherwise the lowest index wins
            int best = assign[g];
            double bd = best >= 0 ? divergence_eval(d, data[g], reps[std::size_t(best)])
                                  : std::numeric_limits<double>::infinity();
            for (int c = 0; c < int(reps.size()); ++c) {
                double v = divergence_eval(d, data[g], reps[std::size_t(c)]);
                if (v < bd) {
                    best = c;
                    bd = v;
                }
            }
            if (best < 0) best = 0;
            if (best != assign[g]) {
                changed = true;
                assign[g] = best;
            }
        }
        // drop representatives that lost all members
        std::vector<int> remap(reps.size(), -1);
        std::vector<Mixed> kept;
        for (int c = 0; c < int(reps.size()); ++c) {
            if (std::find(assign.begin(), assign.end(), c) == assign.end()) {
                rep.events.push_back("class " + std::to_string(c) + " emptied in round " + std::to_string(round) +
                                     ", dropped");
                continue;
            }
            remap[std::size_t(c)] = int(kept.size());
            kept.push_back(reps[std::size_t(c)]);
        }
        for (auto& a : assign) a = remap[std::size_t(a)];
        reps = std::move(kept);
        Partition part(assign, K);
        // reps are indexed by first appearance after canonicalisation
        std::vector<std::vector<std::size_t>> members(reps.size());
        for (std::size_t g = 0; g < n; ++g) members[std::size_t(assign[g])].push_back(g);
        for (std::size_t c = 0; c < reps.size(); ++c) reps[c] = prototype(data, members[c], prior);
        rep.history.push_back(dispersion(data, part, prior, d));
        if (!changed) break;
        if (round > 0) ++rep.rounds;
    }
    rep.partition = Partition(assign, K);
    rep.prototypes = prototypes(data, rep.partition, prior);
    rep.dispersion = dispersion(data, rep.partition, prior, d);
    rep.locally_clustered = is_locally_clustered(data, rep.partition, prior, d).ok;
    return rep;
}

}  // namespace cabee
