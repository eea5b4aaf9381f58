// Python bindings for the core operations: dataset handling, graph
// reduction, space sampling, schedule planning, search, training, and
// evaluation.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "grash/analysis.hpp"
#include "grash/eval.hpp"
#include "grash/kg.hpp"
#include "grash/model.hpp"
#include "grash/reduce.hpp"
#include "grash/search.hpp"
#include "grash/space.hpp"
#include "grash/train.hpp"

namespace py = pybind11;
using namespace grash;

namespace {

std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> triples_out(const std::vector<Triple>& ts) {
    std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> out;
    out.reserve(ts.size());
    for (const Triple& t : ts) out.emplace_back(t.s, t.p, t.o);
    return out;
}

std::vector<Triple> triples_in(const std::vector<std::tuple<uint32_t, uint32_t, uint32_t>>& ts) {
    std::vector<Triple> out;
    out.reserve(ts.size());
    for (const auto& [s, p, o] : ts) out.push_back({s, p, o});
    return out;
}

}  // namespace

PYBIND11_MODULE(_grash, m) {
    m.doc() = "Successive-halving hyperparameter search for KG embeddings";

    py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
        .def(py::init<>())
        .def_readwrite("entities", &KnowledgeGraph::entities)
        .def_readwrite("relations", &KnowledgeGraph::relations)
        .def_property(
            "triples", [](const KnowledgeGraph& g) { return triples_out(g.triples); },
            [](KnowledgeGraph& g, const std::vector<std::tuple<uint32_t, uint32_t, uint32_t>>& ts) {
                g.triples = triples_in(ts);
            })
        .def("num_entities", &KnowledgeGraph::num_entities)
        .def("num_relations", &KnowledgeGraph::num_relations)
        .def("num_triples", &KnowledgeGraph::num_triples);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("entities", &DatasetSplit::entities)
        .def_readonly("relations", &DatasetSplit::relations)
        .def_property_readonly("train",
                               [](const DatasetSplit& d) { return triples_out(d.train); })
        .def_property_readonly("valid",
                               [](const DatasetSplit& d) { return triples_out(d.valid); })
        .def_property_readonly("test", [](const DatasetSplit& d) { return triples_out(d.test); })
        .def_readonly("dropped_valid", &DatasetSplit::dropped_valid)
        .def_readonly("dropped_test", &DatasetSplit::dropped_test)
        .def("train_graph", &DatasetSplit::train_graph);

    m.def(
        "load_triples",
        [](const std::string& path) {
            auto r = load_triples(path);
            return py::make_tuple(r.graph, r.duplicates);
        },
        py::arg("path"), "Load a tab-separated triple file -> (graph, duplicate_count)");
    m.def("save_triples", &save_triples, py::arg("graph"), py::arg("path"));
    m.def(
        "stats",
        [](const KnowledgeGraph& g) {
            auto s = stats(g);
            py::dict d;
            d["entities"] = s.entities;
            d["relations"] = s.relations;
            d["triples"] = s.triples;
            d["min_degree"] = s.min_degree;
            d["mean_degree"] = s.mean_degree;
            d["max_degree"] = s.max_degree;
            return d;
        },
        py::arg("graph"));
    m.def("split_train_valid", &split_train_valid, py::arg("graph"), py::arg("valid_size"),
          py::arg("seed"));
    m.def("split_train_valid_test", &split_train_valid_test, py::arg("graph"),
          py::arg("valid_size"), py::arg("test_size"), py::arg("seed"));
    m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("valid_size") = 5000,
          py::arg("test_size") = 0, py::arg("seed") = 0);

    py::class_<Subgraph>(m, "Subgraph")
        .def_readonly("graph", &Subgraph::graph)
        .def_readonly("entity_map", &Subgraph::entity_map)
        .def_readonly("relation_map", &Subgraph::relation_map)
        .def_readonly("parent_entity_count", &Subgraph::parent_entity_count)
        .def_readonly("parent_triple_count", &Subgraph::parent_triple_count);

    py::class_<CoreLadder>(m, "CoreLadder")
        .def_readonly("coreness", &CoreLadder::coreness)
        .def_property_readonly("levels",
                               [](const CoreLadder& l) {
                                   std::vector<std::tuple<uint32_t, size_t, size_t>> out;
                                   for (const auto& lv : l.levels)
                                       out.emplace_back(lv.k, lv.triples, lv.entities);
                                   return out;
                               })
        .def("max_k", &CoreLadder::max_k);

    m.def("triple_sample", &triple_sample, py::arg("graph"), py::arg("fraction"), py::arg("seed"));
    m.def("random_walk_sample", &random_walk_sample, py::arg("graph"), py::arg("num_starts"),
          py::arg("walk_length"), py::arg("seed"));
    m.def("core_decomposition", &core_decomposition, py::arg("graph"));
    m.def("k_core", &k_core, py::arg("graph"), py::arg("k"), py::arg("ladder"));
    m.def(
        "select_core_for_fidelity",
        [](const CoreLadder& ladder, double target, size_t parent_triples) {
            auto sel = select_core_for_fidelity(ladder, target, parent_triples);
            return py::make_tuple(sel.k, sel.overshoot);
        },
        py::arg("ladder"), py::arg("target_triple_fraction"), py::arg("parent_triple_count"),
        "-> (k, overshoot)");

    m.def("default_space", &default_space);
    m.def("space_to_json", &space_to_json, py::arg("space"));
    m.def("space_from_json", &space_from_json, py::arg("json_text"));
    m.def("config_to_json", &config_to_json, py::arg("config"));
    m.def("config_from_json", &config_from_json, py::arg("json_text"));

    py::class_<SearchSpace>(m, "SearchSpace");

    py::class_<HyperparamConfig>(m, "HyperparamConfig")
        .def_readonly("id", &HyperparamConfig::id)
        .def_readonly("numeric", &HyperparamConfig::numeric)
        .def_readonly("categorical", &HyperparamConfig::categorical);

    m.def(
        "sample_configs",
        [](const SearchSpace& space, size_t n, uint64_t seed, const std::string& scorer) {
            return sample_configs(space, n, seed, scorer_from_string(scorer));
        },
        py::arg("space"), py::arg("n"), py::arg("seed"), py::arg("scorer") = "complex");

    m.def("scale_negatives", &scale_negatives, py::arg("n_neg"), py::arg("sub_entities"),
          py::arg("full_entities"));
    m.def("trial_cost", &trial_cost, py::arg("epochs_i"), py::arg("epochs_full"),
          py::arg("triples_i"), py::arg("triples_full"));
    m.def("spearman", [](const std::vector<double>& a,
                         const std::vector<double>& b) { return spearman(a, b); });
    m.def("mean_ranks", [](const std::vector<double>& v) { return mean_ranks(v); });

    py::class_<SearchParams>(m, "SearchParams")
        .def(py::init<>())
        .def_readwrite("budget", &SearchParams::budget)
        .def_readwrite("num_configs", &SearchParams::num_configs)
        .def_readwrite("eta", &SearchParams::eta)
        .def_readwrite("max_epochs", &SearchParams::max_epochs)
        .def_property(
            "variant", [](const SearchParams& p) { return to_string(p.variant); },
            [](SearchParams& p, const std::string& v) { p.variant = variant_from_string(v); })
        .def_readwrite("valid_size", &SearchParams::valid_size)
        .def_property(
            "scorer", [](const SearchParams& p) { return to_string(p.scorer); },
            [](SearchParams& p, const std::string& v) { p.scorer = scorer_from_string(v); })
        .def_readwrite("dim", &SearchParams::dim)
        .def_readwrite("seed", &SearchParams::seed)
        .def_readwrite("workers", &SearchParams::workers);

    py::class_<RoundPlan>(m, "RoundPlan")
        .def_readonly("round", &RoundPlan::round)
        .def_readonly("n_configs", &RoundPlan::n_configs)
        .def_readonly("fidelity", &RoundPlan::fidelity)
        .def_readonly("epochs", &RoundPlan::epochs)
        .def_readonly("reduce_graph", &RoundPlan::reduce_graph)
        .def_readonly("core_k", &RoundPlan::core_k)
        .def_readonly("core_triples", &RoundPlan::core_triples)
        .def_readonly("target_cost", &RoundPlan::target_cost)
        .def_readonly("planned_cost", &RoundPlan::planned_cost);

    py::class_<SearchSchedule>(m, "SearchSchedule")
        .def_readonly("rounds", &SearchSchedule::rounds)
        .def_readonly("per_round_budget", &SearchSchedule::per_round_budget)
        .def_readonly("plan", &SearchSchedule::plan)
        .def_readonly("planned_total", &SearchSchedule::planned_total);

    m.def(
        "plan_schedule",
        [](const SearchParams& params, const CoreLadder* ladder, size_t full_triples) {
            return plan_schedule(params, ladder, full_triples);
        },
        py::arg("params"), py::arg("ladder") = nullptr, py::arg("full_triples") = 0);

    py::class_<TrialResult>(m, "TrialResult")
        .def_readonly("config_id", &TrialResult::config_id)
        .def_readonly("round", &TrialResult::round)
        .def_readonly("mrr", &TrialResult::mrr)
        .def_readonly("hits_at", &TrialResult::hits_at)
        .def_readonly("planned_cost", &TrialResult::planned_cost)
        .def_readonly("realized_cost", &TrialResult::realized_cost)
        .def_readonly("scaled_negatives", &TrialResult::scaled_negatives)
        .def_readonly("final_loss", &TrialResult::final_loss)
        .def_readonly("ok", &TrialResult::ok)
        .def_readonly("diagnostic", &TrialResult::diagnostic)
        .def_readonly("selected", &TrialResult::selected);

    py::class_<SearchResult>(m, "SearchResult")
        .def_readonly("best", &SearchResult::best)
        .def_readonly("schedule", &SearchResult::schedule)
        .def_readonly("trials", &SearchResult::trials)
        .def_property_readonly("planned_budget",
                               [](const SearchResult& r) { return r.ledger.planned_total; })
        .def_property_readonly("realized_budget",
                               [](const SearchResult& r) { return r.ledger.realized_total; });

    m.def("run_search", &run_search, py::arg("dataset"), py::arg("space"), py::arg("params"),
          py::arg("logger") = nullptr, py::call_guard<py::gil_scoped_release>());

    py::class_<RankingReport>(m, "RankingReport")
        .def_readonly("mrr", &RankingReport::mrr)
        .def_readonly("hits_at", &RankingReport::hits_at)
        .def_readonly("n_queries", &RankingReport::n_queries)
        .def_readonly("score_computations", &RankingReport::score_computations)
        .def_readonly("ranks", &RankingReport::ranks);

    py::class_<EmbeddingModel>(m, "EmbeddingModel")
        .def_property_readonly("scorer",
                               [](const EmbeddingModel& m_) { return to_string(m_.scorer); })
        .def_readonly("dim", &EmbeddingModel::dim)
        .def_readonly("n_entities", &EmbeddingModel::n_entities)
        .def_readonly("n_relations", &EmbeddingModel::n_relations);

    py::class_<FinalTrainResult>(m, "FinalTrainResult")
        .def_readonly("model", &FinalTrainResult::model)
        .def_readonly("valid_report", &FinalTrainResult::valid_report)
        .def_readonly("test_report", &FinalTrainResult::test_report)
        .def_readonly("cost", &FinalTrainResult::cost);

    m.def("final_train", &final_train, py::arg("dataset"), py::arg("config"), py::arg("params"),
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "evaluate",
        [](const EmbeddingModel& model,
           const std::vector<std::tuple<uint32_t, uint32_t, uint32_t>>& eval_triples,
           const std::vector<std::tuple<uint32_t, uint32_t, uint32_t>>& filter_triples,
           bool keep_ranks) {
            auto ev = triples_in(eval_triples);
            auto fi = triples_in(filter_triples);
            py::gil_scoped_release release;
            return evaluate(model, ev, fi, keep_ranks);
        },
        py::arg("model"), py::arg("eval_triples"), py::arg("filter_triples"),
        py::arg("keep_ranks") = false);

    m.def("save_checkpoint", &save_checkpoint, py::arg("model"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    py::class_<CorrelationReport>(m, "CorrelationReport")
        .def_readonly("technique", &CorrelationReport::technique)
        .def_readonly("budget", &CorrelationReport::budget)
        .def_readonly("spearman_rho", &CorrelationReport::spearman_rho)
        .def_readonly("n_configs", &CorrelationReport::n_configs)
        .def_readonly("pairs", &CorrelationReport::pairs)
        .def_readonly("note", &CorrelationReport::note);

    py::class_<SweepParams>(m, "SweepParams")
        .def(py::init<>())
        .def_readwrite("n_configs", &SweepParams::n_configs)
        .def_readwrite("techniques", &SweepParams::techniques)
        .def_readwrite("budgets", &SweepParams::budgets)
        .def_readwrite("full_epochs", &SweepParams::full_epochs)
        .def_property(
            "scorer", [](const SweepParams& p) { return to_string(p.scorer); },
            [](SweepParams& p, const std::string& v) { p.scorer = scorer_from_string(v); })
        .def_readwrite("dim", &SweepParams::dim)
        .def_readwrite("valid_size", &SweepParams::valid_size)
        .def_readwrite("seed", &SweepParams::seed)
        .def_readwrite("workers", &SweepParams::workers);

    m.def("transferability_sweep", &transferability_sweep, py::arg("dataset"), py::arg("space"),
          py::arg("params"), py::call_guard<py::gil_scoped_release>());
}
