#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grash {

struct Triple {
    uint32_t s = 0;
    uint32_t p = 0;
    uint32_t o = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

// A knowledge graph: entity/relation vocabularies plus a duplicate-free
// triple set indexed against them. Immutable after construction.
struct KnowledgeGraph {
    std::vector<std::string> entities;
    std::vector<std::string> relations;
    std::vector<Triple> triples;

    size_t num_entities() const { return entities.size(); }
    size_t num_relations() const { return relations.size(); }
    size_t num_triples() const { return triples.size(); }
};

struct GraphStats {
    size_t entities = 0;
    size_t relations = 0;
    size_t triples = 0;
    size_t min_degree = 0;
    size_t max_degree = 0;
    double mean_degree = 0.0;
};

// Train/valid/test triple lists sharing one vocabulary. Valid/test triples
// whose entities or relations never occur in train are dropped at
// construction and counted.
struct DatasetSplit {
    std::vector<std::string> entities;
    std::vector<std::string> relations;
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    size_t dropped_valid = 0;
    size_t dropped_test = 0;

    KnowledgeGraph train_graph() const { return {entities, relations, train}; }
};

struct LoadResult {
    KnowledgeGraph graph;
    size_t duplicates = 0;
};

// Parses a UTF-8 file with one tab-separated (subject, relation, object)
// label triple per line. Vocabularies are built in first-occurrence order;
// duplicate triples are dropped and counted.
LoadResult load_triples(const std::string& path);

// Writes the graph back out in the same 3-column format.
void save_triples(const KnowledgeGraph& graph, const std::string& path);

GraphStats stats(const KnowledgeGraph& graph);

// Per-entity degree: number of triples the entity occurs in (a self-loop
// counts once).
std::vector<uint32_t> entity_degrees(const KnowledgeGraph& graph);

// Randomly moves valid_size triples into a validation split. Valid triples
// that would leave an entity or relation unseen in train are dropped and
// counted instead. Deterministic per seed.
DatasetSplit split_train_valid(const KnowledgeGraph& graph, size_t valid_size, uint64_t seed);

// Same, but additionally carves out a test split (drawn before valid).
DatasetSplit split_train_valid_test(const KnowledgeGraph& graph, size_t valid_size,
                                    size_t test_size, uint64_t seed);

// Loads train.txt / valid.txt / test.txt from a directory against a shared
// vocabulary built from train.
DatasetSplit load_dataset_dir(const std::string& dir);

// Loads either a dataset directory or a single triple file (in which case
// valid/test are split off with the given sizes and seed).
DatasetSplit load_dataset(const std::string& path, size_t valid_size, size_t test_size,
                          uint64_t seed);

}  // namespace grash
