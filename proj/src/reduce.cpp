#include "grash/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "grash/rng.hpp"

namespace grash {

std::string to_string(ReductionMethod m) {
    switch (m) {
        case ReductionMethod::Identity: return "identity";
        case ReductionMethod::TripleSample: return "triple";
        case ReductionMethod::RandomWalk: return "walk";
        case ReductionMethod::KCore: return "kcore";
    }
    return "?";
}

const CoreLadder::Level* CoreLadder::level(uint32_t k) const {
    for (const Level& l : levels) {
        if (l.k == k) return &l;
    }
    return nullptr;
}

Subgraph induce_subgraph(const KnowledgeGraph& parent, const std::vector<uint32_t>& triple_ids,
                         Provenance provenance) {
    if (triple_ids.empty()) throw std::runtime_error("reduction produced an empty subgraph");
    Subgraph sub;
    sub.provenance = provenance;
    sub.parent_entity_count = parent.num_entities();
    sub.parent_triple_count = parent.num_triples();

    constexpr uint32_t kUnmapped = UINT32_MAX;
    std::vector<uint32_t> ent_new(parent.num_entities(), kUnmapped);
    std::vector<uint32_t> rel_new(parent.num_relations(), kUnmapped);

    sub.graph.triples.reserve(triple_ids.size());
    for (uint32_t id : triple_ids) {
        const Triple& t = parent.triples[id];
        auto map_ent = [&](uint32_t e) {
            if (ent_new[e] == kUnmapped) {
                ent_new[e] = static_cast<uint32_t>(sub.entity_map.size());
                sub.entity_map.push_back(e);
                sub.graph.entities.push_back(parent.entities[e]);
            }
            return ent_new[e];
        };
        if (rel_new[t.p] == kUnmapped) {
            rel_new[t.p] = static_cast<uint32_t>(sub.relation_map.size());
            sub.relation_map.push_back(t.p);
            sub.graph.relations.push_back(parent.relations[t.p]);
        }
        sub.graph.triples.push_back({map_ent(t.s), rel_new[t.p], map_ent(t.o)});
    }
    return sub;
}

Subgraph identity_subgraph(const KnowledgeGraph& parent) {
    std::vector<uint32_t> all(parent.num_triples());
    std::iota(all.begin(), all.end(), 0);
    return induce_subgraph(parent, all, {ReductionMethod::Identity, 1.0, 0, 0, 0});
}

Subgraph triple_sample(const KnowledgeGraph& graph, double fraction, uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("triple_sample: fraction must be in (0, 1]");
    }
    size_t keep = static_cast<size_t>(std::llround(fraction * graph.num_triples()));
    if (keep == 0) throw std::runtime_error("triple_sample: fraction retains zero triples");

    std::vector<uint32_t> ids(graph.num_triples());
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates, then restore parent order for determinism of the
    // induced vocabulary.
    for (size_t i = 0; i < keep; ++i) {
        std::uniform_int_distribution<size_t> pick(i, ids.size() - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(keep);
    std::sort(ids.begin(), ids.end());
    return induce_subgraph(graph, ids, {ReductionMethod::TripleSample, fraction, 0, 0, 0});
}

Subgraph random_walk_sample(const KnowledgeGraph& graph, uint32_t num_starts,
                            uint32_t walk_length, uint64_t seed) {
    if (num_starts < 1 || walk_length < 1) {
        throw std::invalid_argument("random_walk_sample: num_starts and walk_length must be >= 1");
    }
    if (num_starts > graph.num_entities()) {
        throw std::invalid_argument("random_walk_sample: more starts than entities");
    }

    // Incidence lists: entity -> ids of triples it occurs in.
    std::vector<uint32_t> deg(graph.num_entities(), 0);
    for (const Triple& t : graph.triples) {
        ++deg[t.s];
        if (t.o != t.s) ++deg[t.o];
    }
    std::vector<size_t> offset(graph.num_entities() + 1, 0);
    for (size_t e = 0; e < graph.num_entities(); ++e) offset[e + 1] = offset[e] + deg[e];
    std::vector<uint32_t> incident(offset.back());
    {
        std::vector<size_t> cursor(offset.begin(), offset.end() - 1);
        for (uint32_t id = 0; id < graph.num_triples(); ++id) {
            const Triple& t = graph.triples[id];
            incident[cursor[t.s]++] = id;
            if (t.o != t.s) incident[cursor[t.o]++] = id;
        }
    }

    Rng rng(seed);
    std::vector<uint32_t> starts(graph.num_entities());
    std::iota(starts.begin(), starts.end(), 0);
    for (size_t i = 0; i < num_starts; ++i) {
        std::uniform_int_distribution<size_t> pick(i, starts.size() - 1);
        std::swap(starts[i], starts[pick(rng)]);
    }

    std::vector<char> retained(graph.num_triples(), 0);
    for (size_t i = 0; i < num_starts; ++i) {
        uint32_t cur = starts[i];
        for (uint32_t step = 0; step < walk_length; ++step) {
            size_t n = offset[cur + 1] - offset[cur];
            if (n == 0) break;  // cannot happen on a well-formed graph
            std::uniform_int_distribution<size_t> pick(0, n - 1);
            uint32_t id = incident[offset[cur] + pick(rng)];
            retained[id] = 1;
            const Triple& t = graph.triples[id];
            cur = (t.s == cur) ? t.o : t.s;
        }
    }

    std::vector<uint32_t> ids;
    for (uint32_t id = 0; id < graph.num_triples(); ++id) {
        if (retained[id]) ids.push_back(id);
    }
    return induce_subgraph(graph, ids,
                           {ReductionMethod::RandomWalk, 0.0, num_starts, walk_length, 0});
}

CoreLadder core_decomposition(const KnowledgeGraph& graph) {
    const size_t n = graph.num_entities();
    std::vector<uint32_t> deg = entity_degrees(graph);

    // Incidence lists (as in random_walk_sample).
    std::vector<size_t> offset(n + 1, 0);
    for (size_t e = 0; e < n; ++e) offset[e + 1] = offset[e] + deg[e];
    std::vector<uint32_t> incident(offset.back());
    {
        std::vector<size_t> cursor(offset.begin(), offset.end() - 1);
        for (uint32_t id = 0; id < graph.num_triples(); ++id) {
            const Triple& t = graph.triples[id];
            incident[cursor[t.s]++] = id;
            if (t.o != t.s) incident[cursor[t.o]++] = id;
        }
    }

    // Bucket peeling: repeatedly remove a minimum-degree entity; its
    // coreness is the running maximum of degrees at removal time.
    uint32_t max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    std::vector<std::vector<uint32_t>> buckets(max_deg + 1);
    for (uint32_t e = 0; e < n; ++e) buckets[deg[e]].push_back(e);

    CoreLadder ladder;
    ladder.coreness.assign(n, 0);
    std::vector<char> ent_removed(n, 0);
    std::vector<char> triple_removed(graph.num_triples(), 0);
    std::vector<uint32_t> cur_deg = deg;

    uint32_t k = 0;
    uint32_t bucket = 0;
    size_t removed = 0;
    while (removed < n) {
        while (bucket <= max_deg && buckets[bucket].empty()) ++bucket;
        uint32_t e = buckets[bucket].back();
        buckets[bucket].pop_back();
        if (ent_removed[e] || cur_deg[e] != bucket) continue;  // stale bucket entry
        k = std::max(k, bucket);
        ladder.coreness[e] = k;
        ent_removed[e] = 1;
        ++removed;
        for (size_t i = offset[e]; i < offset[e + 1]; ++i) {
            uint32_t id = incident[i];
            if (triple_removed[id]) continue;
            triple_removed[id] = 1;
            const Triple& t = graph.triples[id];
            uint32_t other = (t.s == e) ? t.o : t.s;
            if (other != e && !ent_removed[other]) {
                uint32_t d = --cur_deg[other];
                buckets[d].push_back(other);
                bucket = std::min(bucket, d);
            }
        }
    }

    // Level sizes: a triple lives in level k iff min coreness of its
    // endpoints is >= k; an entity iff its coreness is >= k.
    std::vector<size_t> triple_hist(k + 2, 0), ent_hist(k + 2, 0);
    for (const Triple& t : graph.triples) {
        ++triple_hist[std::min(ladder.coreness[t.s], ladder.coreness[t.o])];
    }
    for (uint32_t e = 0; e < n; ++e) ++ent_hist[ladder.coreness[e]];
    size_t tri_ge = 0, ent_ge = 0;
    std::vector<CoreLadder::Level> rev;
    for (uint32_t level = k; level >= 1; --level) {
        tri_ge += triple_hist[level];
        ent_ge += ent_hist[level];
        if (tri_ge > 0) rev.push_back({level, tri_ge, ent_ge});
    }
    ladder.levels.assign(rev.rbegin(), rev.rend());
    return ladder;
}

Subgraph k_core(const KnowledgeGraph& graph, uint32_t k, const CoreLadder& ladder) {
    if (ladder.level(k) == nullptr) {
        throw std::invalid_argument("k_core: " + std::to_string(k) +
                                    "-core is empty; deepest nonempty core is k=" +
                                    std::to_string(ladder.max_k()));
    }
    std::vector<uint32_t> ids;
    for (uint32_t id = 0; id < graph.num_triples(); ++id) {
        const Triple& t = graph.triples[id];
        if (ladder.coreness[t.s] >= k && ladder.coreness[t.o] >= k) ids.push_back(id);
    }
    return induce_subgraph(graph, ids, {ReductionMethod::KCore, 0.0, 0, 0, k});
}

CoreSelection select_core_for_fidelity(const CoreLadder& ladder, double target_triple_fraction,
                                       size_t parent_triple_count) {
    if (!(target_triple_fraction > 0.0) || target_triple_fraction > 1.0) {
        throw std::invalid_argument("select_core_for_fidelity: target must be in (0, 1]");
    }
    if (ladder.levels.empty()) throw std::invalid_argument("select_core_for_fidelity: empty ladder");
    double budget = target_triple_fraction * static_cast<double>(parent_triple_count);
    for (const auto& level : ladder.levels) {
        if (static_cast<double>(level.triples) <= budget) return {level.k, false};
    }
    return {ladder.max_k(), true};
}

void save_ladder(const CoreLadder& ladder, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ladder cache: " + path);
    out << "grash-core-ladder v1\n";
    out << "levels " << ladder.levels.size() << '\n';
    for (const auto& l : ladder.levels) out << l.k << ' ' << l.triples << ' ' << l.entities << '\n';
    out << "coreness " << ladder.coreness.size() << '\n';
    for (uint32_t c : ladder.coreness) out << c << '\n';
}

CoreLadder load_ladder(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ladder cache: " + path);
    std::string magic, version, word;
    in >> magic >> version;
    if (magic != "grash-core-ladder" || version != "v1") {
        throw std::runtime_error("bad ladder cache header in " + path);
    }
    CoreLadder ladder;
    size_t n = 0;
    in >> word >> n;
    if (word != "levels") throw std::runtime_error("bad ladder cache in " + path);
    ladder.levels.resize(n);
    for (auto& l : ladder.levels) in >> l.k >> l.triples >> l.entities;
    in >> word >> n;
    if (word != "coreness") throw std::runtime_error("bad ladder cache in " + path);
    ladder.coreness.resize(n);
    for (auto& c : ladder.coreness) in >> c;
    if (!in) throw std::runtime_error("truncated ladder cache in " + path);
    return ladder;
}

CoreLadder cached_core_decomposition(const KnowledgeGraph& graph, const std::string& cache_path) {
    if (std::filesystem::exists(cache_path)) {
        CoreLadder ladder = load_ladder(cache_path);
        if (ladder.coreness.size() == graph.num_entities()) return ladder;
    }
    CoreLadder ladder = core_decomposition(graph);
    save_ladder(ladder, cache_path);
    return ladder;
}

}  // namespace grash
