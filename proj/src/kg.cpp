#include "grash/kg.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "grash/rng.hpp"

namespace grash {

namespace {

struct TripleHash {
    size_t operator()(const Triple& t) const {
        uint64_t h = splitmix64(t.s);
        h = splitmix64(h ^ t.p);
        return splitmix64(h ^ t.o);
    }
};

}  // namespace

LoadResult load_triples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triple file: " + path);

    LoadResult result;
    auto& g = result.graph;
    std::unordered_map<std::string, uint32_t> ent_ids, rel_ids;
    std::unordered_set<Triple, TripleHash> seen;

    auto intern = [](std::unordered_map<std::string, uint32_t>& ids,
                     std::vector<std::string>& vocab, const std::string& label) {
        auto [it, inserted] = ids.emplace(label, static_cast<uint32_t>(vocab.size()));
        if (inserted) vocab.push_back(label);
        return it->second;
    };

    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos ||
            line.find('\t', t2 + 1) != std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields");
        }
        Triple t;
        t.s = intern(ent_ids, g.entities, line.substr(0, t1));
        t.p = intern(rel_ids, g.relations, line.substr(t1 + 1, t2 - t1 - 1));
        t.o = intern(ent_ids, g.entities, line.substr(t2 + 1));
        if (seen.insert(t).second) {
            g.triples.push_back(t);
        } else {
            ++result.duplicates;
        }
    }
    if (g.triples.empty()) throw std::runtime_error("no triples in " + path);
    return result;
}

void save_triples(const KnowledgeGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write triple file: " + path);
    for (const Triple& t : graph.triples) {
        out << graph.entities[t.s] << '\t' << graph.relations[t.p] << '\t'
            << graph.entities[t.o] << '\n';
    }
}

std::vector<uint32_t> entity_degrees(const KnowledgeGraph& graph) {
    std::vector<uint32_t> deg(graph.num_entities(), 0);
    for (const Triple& t : graph.triples) {
        ++deg[t.s];
        if (t.o != t.s) ++deg[t.o];
    }
    return deg;
}

GraphStats stats(const KnowledgeGraph& graph) {
    GraphStats st;
    st.entities = graph.num_entities();
    st.relations = graph.num_relations();
    st.triples = graph.num_triples();
    auto deg = entity_degrees(graph);
    if (!deg.empty()) {
        auto [mn, mx] = std::minmax_element(deg.begin(), deg.end());
        st.min_degree = *mn;
        st.max_degree = *mx;
        st.mean_degree = std::accumulate(deg.begin(), deg.end(), 0.0) / deg.size();
    }
    return st;
}

namespace {

// Moves the candidate triples at indices [0, take) of `order` into `held`
// unless that would leave an entity/relation unseen in the remaining pool.
// Occurrence counts are maintained over pool ∪ later candidates, so the
// pass is one-shot and deterministic.
size_t carve_split(const KnowledgeGraph& graph, std::vector<Triple>& pool,
                   std::vector<Triple>& held, size_t take, Rng& rng) {
    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<uint32_t> ent_count(graph.num_entities(), 0);
    std::vector<uint32_t> rel_count(graph.num_relations(), 0);
    for (const Triple& t : pool) {
        ++ent_count[t.s];
        ++ent_count[t.o];
        ++rel_count[t.p];
    }

    // All candidates leave train whether they end up held or dropped, so
    // the unseen check is made against the post-removal train counts.
    size_t n_candidates = std::min(take, order.size());
    std::vector<char> taken(pool.size(), 0);
    for (size_t i = 0; i < n_candidates; ++i) {
        const Triple& t = pool[order[i]];
        --ent_count[t.s];
        --ent_count[t.o];
        --rel_count[t.p];
        taken[order[i]] = 1;
    }
    size_t dropped = 0;
    for (size_t i = 0; i < n_candidates; ++i) {
        const Triple& t = pool[order[i]];
        bool ok = ent_count[t.s] > 0 && rel_count[t.p] > 0 && ent_count[t.o] > 0;
        if (ok) {
            held.push_back(t);
        } else {
            ++dropped;  // would reference a train-unseen entity/relation
        }
    }
    std::vector<Triple> remaining;
    remaining.reserve(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        if (!taken[i]) remaining.push_back(pool[i]);
    }
    pool = std::move(remaining);
    return dropped;
}

}  // namespace

DatasetSplit split_train_valid(const KnowledgeGraph& graph, size_t valid_size, uint64_t seed) {
    return split_train_valid_test(graph, valid_size, 0, seed);
}

DatasetSplit split_train_valid_test(const KnowledgeGraph& graph, size_t valid_size,
                                    size_t test_size, uint64_t seed) {
    if (valid_size + test_size >= graph.num_triples()) {
        throw std::invalid_argument("split sizes must leave at least one train triple");
    }
    DatasetSplit split;
    split.entities = graph.entities;
    split.relations = graph.relations;
    split.train = graph.triples;
    Rng rng(seed);
    if (test_size > 0) split.dropped_test = carve_split(graph, split.train, split.test, test_size, rng);
    split.dropped_valid = carve_split(graph, split.train, split.valid, valid_size, rng);
    return split;
}

namespace {

void append_indexed(const std::string& path, const std::unordered_map<std::string, uint32_t>& ent_ids,
                    const std::unordered_map<std::string, uint32_t>& rel_ids,
                    std::vector<Triple>& out, size_t& dropped) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triple file: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos ||
            line.find('\t', t2 + 1) != std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields");
        }
        auto s = ent_ids.find(line.substr(0, t1));
        auto p = rel_ids.find(line.substr(t1 + 1, t2 - t1 - 1));
        auto o = ent_ids.find(line.substr(t2 + 1));
        if (s == ent_ids.end() || p == rel_ids.end() || o == ent_ids.end()) {
            ++dropped;  // unseen in train, cannot be ranked
            continue;
        }
        out.push_back({s->second, p->second, o->second});
    }
}

}  // namespace

DatasetSplit load_dataset_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    auto train = load_triples((fs::path(dir) / "train.txt").string());
    DatasetSplit split;
    split.entities = train.graph.entities;
    split.relations = train.graph.relations;
    split.train = train.graph.triples;

    std::unordered_map<std::string, uint32_t> ent_ids, rel_ids;
    for (uint32_t i = 0; i < split.entities.size(); ++i) ent_ids[split.entities[i]] = i;
    for (uint32_t i = 0; i < split.relations.size(); ++i) rel_ids[split.relations[i]] = i;

    if (fs::exists(fs::path(dir) / "valid.txt")) {
        append_indexed((fs::path(dir) / "valid.txt").string(), ent_ids, rel_ids, split.valid,
                       split.dropped_valid);
    }
    if (fs::exists(fs::path(dir) / "test.txt")) {
        append_indexed((fs::path(dir) / "test.txt").string(), ent_ids, rel_ids, split.test,
                       split.dropped_test);
    }
    return split;
}

DatasetSplit load_dataset(const std::string& path, size_t valid_size, size_t test_size,
                          uint64_t seed) {
    if (std::filesystem::is_directory(path)) return load_dataset_dir(path);
    auto loaded = load_triples(path);
    return split_train_valid_test(loaded.graph, valid_size, test_size, seed);
}

}  // namespace grash
