// grash: successive-halving hyperparameter search for KG embedding models,
// with graph- and epoch-reduction low-fidelity trials.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grash/analysis.hpp"
#include "grash/eval.hpp"
#include "grash/kg.hpp"
#include "grash/model.hpp"
#include "grash/reduce.hpp"
#include "grash/search.hpp"
#include "grash/space.hpp"
#include "grash/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace grash;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// FNV-1a over the vocabulary-resolved triples; stable across label order.
uint64_t dataset_hash(const DatasetSplit& ds) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xFF;
        h *= 1099511628211ULL;
    };
    auto mix_triples = [&](const std::vector<Triple>& ts) {
        for (const Triple& t : ts) {
            mix(ds.entities[t.s]);
            mix(ds.relations[t.p]);
            mix(ds.entities[t.o]);
        }
    };
    mix_triples(ds.train);
    mix_triples(ds.valid);
    mix_triples(ds.test);
    return h;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct Manifest {
    std::string command;
    json config = json::object();
    std::string started = iso_now();

    void write(const fs::path& run_dir, uint64_t data_hash) const {
        json m;
        m["command"] = command;
        m["config"] = config;
        m["dataset_hash"] = data_hash;
        m["version"] = kVersion;
        m["started"] = started;
        m["finished"] = iso_now();
        write_text(run_dir / "manifest.json", m.dump(2) + "\n");
    }
};

json report_json(const RankingReport& rep) {
    json r;
    r["mrr"] = rep.mrr;
    for (const auto& [k, v] : rep.hits_at) r["hits@" + std::to_string(k)] = v;
    r["queries"] = rep.n_queries;
    r["score_computations"] = rep.score_computations;
    return r;
}

void print_report(const char* name, const RankingReport& rep) {
    std::printf("%-8s MRR %.4f", name, rep.mrr);
    for (const auto& [k, v] : rep.hits_at) std::printf("  Hits@%u %.4f", k, v);
    std::printf("  (%zu queries)\n", rep.n_queries);
}

json trial_json(const TrialResult& t) {
    json r;
    r["round"] = t.round;
    r["config"] = t.config_id;
    r["mrr"] = t.mrr;
    for (const auto& [k, v] : t.hits_at) r["hits@" + std::to_string(k)] = v;
    r["planned_cost"] = t.planned_cost;
    r["realized_cost"] = t.realized_cost;
    r["negatives"] = t.scaled_negatives;
    r["final_loss"] = t.final_loss;
    r["score_computations"] = t.score_computations;
    r["ok"] = t.ok;
    r["selected"] = t.selected;
    if (!t.diagnostic.empty()) r["diagnostic"] = t.diagnostic;
    return r;
}

// Shared dataset flags: a directory with train/valid/test files or a single
// triple file split on the fly.
struct DatasetArgs {
    std::string path;
    size_t valid_size = 5000;
    size_t test_size = 0;
    uint64_t split_seed = 0;

    void attach(CLI::App* cmd, bool positional = false) {
        (positional ? cmd->add_option("dataset", path, "Dataset directory or triple file")
                    : cmd->add_option("--dataset", path, "Dataset directory or triple file"))
            ->required();
        cmd->add_option("--valid-size", valid_size,
                        "Validation triples carved from a single-file dataset");
        cmd->add_option("--test-size", test_size, "Test triples carved from a single-file dataset");
        cmd->add_option("--split-seed", split_seed, "Seed for the on-the-fly split");
    }

    DatasetSplit load() const { return load_dataset(path, valid_size, test_size, split_seed); }
};

int run_dataset_stats(const std::string& path) {
    auto loaded = load_triples(path);
    auto st = stats(loaded.graph);
    std::printf("entities   %zu\n", st.entities);
    std::printf("relations  %zu\n", st.relations);
    std::printf("triples    %zu\n", st.triples);
    std::printf("duplicates %zu\n", loaded.duplicates);
    std::printf("degree     min %zu  mean %.2f  max %zu\n", st.min_degree, st.mean_degree,
                st.max_degree);
    return 0;
}

int run_dataset_split(const std::string& path, size_t valid_size, size_t test_size, uint64_t seed,
                      const std::string& out_dir) {
    auto loaded = load_triples(path);
    auto ds = test_size > 0 ? split_train_valid_test(loaded.graph, valid_size, test_size, seed)
                            : split_train_valid(loaded.graph, valid_size, seed);
    fs::create_directories(out_dir);
    auto write_split = [&](const char* name, const std::vector<Triple>& triples) {
        save_triples({ds.entities, ds.relations, triples}, (fs::path(out_dir) / name).string());
    };
    write_split("train.txt", ds.train);
    write_split("valid.txt", ds.valid);
    if (test_size > 0) write_split("test.txt", ds.test);
    std::fprintf(stderr, "train %zu / valid %zu / test %zu (dropped %zu valid, %zu test)\n",
                 ds.train.size(), ds.valid.size(), ds.test.size(), ds.dropped_valid,
                 ds.dropped_test);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GraSH-style successive-halving hyperparameter search for KG embeddings"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Config file (TOML; command-line flags override)");
    app.require_subcommand(1);

    // ------------------------------------------------------------- dataset
    auto* dataset = app.add_subcommand("dataset", "Inspect or split triple files");
    dataset->require_subcommand(1);

    std::string ds_path;
    auto* ds_stats = dataset->add_subcommand("stats", "Print dataset statistics");
    ds_stats->add_option("path", ds_path, "Triple file")->required();

    size_t split_valid = 5000, split_test = 0;
    uint64_t split_seed = 0;
    std::string split_out = "split";
    auto* ds_split = dataset->add_subcommand("split", "Carve train/valid[/test] splits");
    ds_split->add_option("path", ds_path, "Triple file")->required();
    ds_split->add_option("--valid-size", split_valid, "Validation split size")->required();
    ds_split->add_option("--test-size", split_test, "Test split size");
    ds_split->add_option("--seed", split_seed, "Split seed");
    ds_split->add_option("--out", split_out, "Output directory");

    // -------------------------------------------------------------- reduce
    std::string red_path, red_method = "kcore", red_out = "reduced.txt";
    std::string red_cache;
    double red_target = 0.5;
    uint32_t red_k = 0, red_starts = 0, red_length = 10;
    uint64_t red_seed = 0;
    auto* reduce = app.add_subcommand("reduce", "Extract a reduced subgraph");
    reduce->add_option("path", red_path, "Triple file")->required();
    reduce->add_option("--method", red_method, "triple | walk | kcore")
        ->check(CLI::IsMember({"triple", "walk", "kcore"}));
    reduce->add_option("--target", red_target, "Target triple fraction (triple/kcore/walk)");
    reduce->add_option("--k", red_k, "Explicit core level (kcore; overrides --target)");
    reduce->add_option("--starts", red_starts, "Walk starts (walk; overrides --target)");
    reduce->add_option("--length", red_length, "Walk length");
    reduce->add_option("--seed", red_seed, "Sampling seed");
    reduce->add_option("--ladder-cache", red_cache, "Core-ladder cache file (kcore)");
    reduce->add_option("--out", red_out, "Output triple file");

    // --------------------------------------------------------------- space
    auto* space_cmd = app.add_subcommand("space", "Hyperparameter space utilities");
    space_cmd->require_subcommand(1);
    size_t space_n = 64;
    uint64_t space_seed = 0;
    std::string space_model = "complex", space_file;
    auto* space_sample = space_cmd->add_subcommand("sample", "Sample configs as JSON lines");
    space_sample->add_option("-n,--num", space_n, "Number of configs");
    space_sample->add_option("--seed", space_seed, "Sampling seed");
    space_sample->add_option("--model", space_model, "complex | transe | rotate")
        ->check(CLI::IsMember({"complex", "transe", "rotate"}));
    space_sample->add_option("--space", space_file, "Space definition JSON (default space if omitted)");

    // -------------------------------------------------------------- search
    DatasetArgs search_ds;
    SearchParams sp;
    std::string search_model = "complex", search_variant = "combined";
    std::string search_space_file, search_out = "run";
    bool search_final = true;
    auto* search = app.add_subcommand("search", "Run the successive-halving search");
    search_ds.attach(search);
    search->add_option("--model", search_model, "complex | transe | rotate")
        ->check(CLI::IsMember({"complex", "transe", "rotate"}));
    search->add_option("--dim", sp.dim, "Embedding dimension");
    search->add_option("--budget", sp.budget, "Total budget B in full-training units")
        ->check(CLI::PositiveNumber);
    search->add_option("--trials", sp.num_configs, "Number of sampled configs n")
        ->check(CLI::Range(size_t(2), size_t(1) << 20));
    search->add_option("--eta", sp.eta, "Reduction factor")->check(CLI::Range(size_t(2), size_t(1) << 20));
    search->add_option("--variant", search_variant, "epoch | graph | combined")
        ->check(CLI::IsMember({"epoch", "graph", "combined"}));
    search->add_option("--max-epochs", sp.max_epochs, "Full-fidelity epoch count E")
        ->check(CLI::PositiveNumber);
    search->add_option("--trial-valid-size", sp.valid_size, "Per-round validation size");
    search->add_option("--seed", sp.seed, "Search seed");
    search->add_option("--workers", sp.workers, "Concurrent trials")->check(CLI::PositiveNumber);
    search->add_option("--space", search_space_file, "Space definition JSON");
    search->add_option("--out", search_out, "Run directory");
    search->add_flag("!--no-final-train", search_final,
                     "Skip the final full-fidelity training of the winner");

    // --------------------------------------------------------------- train
    DatasetArgs train_ds;
    std::string train_config_file, train_model = "complex", train_out = "train-run";
    uint32_t train_dim = 128;
    double train_epochs = 64;
    uint64_t train_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "Train one config at full fidelity");
    train_ds.attach(train_cmd);
    train_cmd->add_option("--config-json", train_config_file, "Config JSON (e.g. best_config.json)")
        ->required();
    train_cmd->add_option("--model", train_model, "complex | transe | rotate")
        ->check(CLI::IsMember({"complex", "transe", "rotate"}));
    train_cmd->add_option("--dim", train_dim, "Embedding dimension");
    train_cmd->add_option("--epochs", train_epochs, "Training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_seed, "Training seed");
    train_cmd->add_option("--out", train_out, "Run directory");

    // ---------------------------------------------------------------- eval
    DatasetArgs eval_ds;
    std::string eval_ckpt, eval_split = "test";
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (filtered ranking)");
    eval_cmd->add_option("checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval_ds.attach(eval_cmd, /*positional=*/true);
    eval_cmd->add_option("--split", eval_split, "valid | test")
        ->check(CLI::IsMember({"valid", "test"}));

    // ------------------------------------------------------------ transfer
    DatasetArgs tr_ds;
    SweepParams sweep;
    std::string tr_model = "complex", tr_out = "transfer-run", tr_space_file;
    std::vector<std::string> tr_techniques = sweep.techniques;
    std::vector<double> tr_budgets = sweep.budgets;
    auto* transfer = app.add_subcommand("transfer", "Rank-correlation transferability sweep");
    tr_ds.attach(transfer);
    transfer->add_option("--configs", sweep.n_configs, "Configs per pass")
        ->check(CLI::Range(size_t(3), size_t(10000)));
    transfer->add_option("--techniques", tr_techniques,
                         "Subset of kcore,walk,triple,epoch,combined")->delimiter(',');
    transfer->add_option("--budgets", tr_budgets, "Relative budgets")->delimiter(',');
    transfer->add_option("--full-epochs", sweep.full_epochs, "Reference pass epochs")
        ->check(CLI::PositiveNumber);
    transfer->add_option("--model", tr_model, "complex | transe | rotate")
        ->check(CLI::IsMember({"complex", "transe", "rotate"}));
    transfer->add_option("--dim", sweep.dim, "Embedding dimension");
    transfer->add_option("--trial-valid-size", sweep.valid_size, "Validation size per pass");
    transfer->add_option("--seed", sweep.seed, "Sweep seed");
    transfer->add_option("--workers", sweep.workers, "Concurrent trials")
        ->check(CLI::PositiveNumber);
    transfer->add_option("--space", tr_space_file, "Space definition JSON");
    transfer->add_option("--out", tr_out, "Run directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (ds_stats->parsed()) return run_dataset_stats(ds_path);
        if (ds_split->parsed()) {
            return run_dataset_split(ds_path, split_valid, split_test, split_seed, split_out);
        }

        if (reduce->parsed()) {
            auto loaded = load_triples(red_path);
            Subgraph sub;
            if (red_method == "triple") {
                sub = triple_sample(loaded.graph, red_target, red_seed);
            } else if (red_method == "walk") {
                uint32_t starts = red_starts;
                if (starts == 0) {
                    starts = std::max<uint32_t>(
                        1, uint32_t(red_target * double(loaded.graph.num_entities())));
                }
                sub = random_walk_sample(loaded.graph, starts, red_length, red_seed);
            } else {
                auto ladder = red_cache.empty()
                                  ? core_decomposition(loaded.graph)
                                  : cached_core_decomposition(loaded.graph, red_cache);
                uint32_t k = red_k;
                if (k == 0) {
                    auto sel = select_core_for_fidelity(ladder, red_target,
                                                        loaded.graph.num_triples());
                    if (sel.overshoot) {
                        std::fprintf(stderr,
                                     "warning: deepest core (k=%u) still exceeds target %.4f\n",
                                     sel.k, red_target);
                    }
                    k = sel.k;
                }
                sub = k_core(loaded.graph, k, ladder);
                std::fprintf(stderr, "selected k=%u\n", k);
            }
            save_triples(sub.graph, red_out);
            std::fprintf(stderr, "%zu -> %zu triples, %zu -> %zu entities\n",
                         sub.parent_triple_count, sub.graph.num_triples(), sub.parent_entity_count,
                         sub.graph.num_entities());
            return 0;
        }

        if (space_sample->parsed()) {
            auto space = space_file.empty() ? default_space() : load_space(space_file);
            auto scorer = scorer_from_string(space_model);
            for (const auto& cfg : sample_configs(space, space_n, space_seed, scorer)) {
                std::printf("%s\n", config_to_json(cfg).c_str());
            }
            return 0;
        }

        if (search->parsed()) {
            sp.scorer = scorer_from_string(search_model);
            sp.variant = variant_from_string(search_variant);
            auto space = search_space_file.empty() ? default_space() : load_space(search_space_file);
            auto ds = search_ds.load();

            fs::create_directories(search_out);
            Manifest manifest;
            manifest.command = "search";
            manifest.config = {{"dataset", search_ds.path},
                               {"model", search_model},
                               {"dim", sp.dim},
                               {"budget", sp.budget},
                               {"trials", sp.num_configs},
                               {"eta", sp.eta},
                               {"variant", search_variant},
                               {"max_epochs", sp.max_epochs},
                               {"trial_valid_size", sp.valid_size},
                               {"seed", sp.seed},
                               {"workers", sp.workers},
                               {"space", search_space_file},
                               {"valid_size", search_ds.valid_size},
                               {"test_size", search_ds.test_size},
                               {"split_seed", search_ds.split_seed}};

            std::ofstream trials_out(fs::path(search_out) / "trials.jsonl");
            size_t done = 0;
            double spent = 0.0;
            auto res = run_search(ds, space, sp, [&](const TrialResult& t) {
                trials_out << trial_json(t).dump() << "\n";
                ++done;
                spent += t.realized_cost;
                std::fprintf(stderr, "round %zu  trial %zu done  config %d  mrr %.4f  budget %.3f\n",
                             t.round, done, t.config_id, t.mrr, spent);
            });
            trials_out.flush();

            write_text(fs::path(search_out) / "best_config.json",
                       config_to_json(res.best) + "\n");
            json summary;
            summary["best_config"] = res.best.id;
            summary["rounds"] = res.schedule.rounds;
            summary["planned_budget"] = res.ledger.planned_total;
            summary["realized_budget"] = res.ledger.realized_total;

            if (search_final) {
                std::fprintf(stderr, "final full-fidelity training of config %d...\n",
                             res.best.id);
                auto fin = final_train(ds, res.best, sp);
                save_checkpoint(fin.model, (fs::path(search_out) / "checkpoint.bin").string());
                summary["valid"] = report_json(fin.valid_report);
                if (!ds.test.empty()) summary["test"] = report_json(fin.test_report);
                print_report("valid", fin.valid_report);
                if (!ds.test.empty()) print_report("test", fin.test_report);
            }
            write_text(fs::path(search_out) / "report.json", summary.dump(2) + "\n");
            manifest.write(search_out, dataset_hash(ds));
            std::fprintf(stderr, "run artifacts in %s\n", search_out.c_str());
            return 0;
        }

        if (train_cmd->parsed()) {
            auto ds = train_ds.load();
            std::ifstream in(train_config_file);
            if (!in) throw std::runtime_error("cannot read " + train_config_file);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            auto cfg = config_from_json(text);
            SearchParams p;
            p.scorer = scorer_from_string(train_model);
            p.dim = train_dim;
            p.max_epochs = train_epochs;
            p.seed = train_seed;
            auto fin = final_train(ds, cfg, p);

            fs::create_directories(train_out);
            save_checkpoint(fin.model, (fs::path(train_out) / "checkpoint.bin").string());
            json summary;
            summary["valid"] = report_json(fin.valid_report);
            if (!ds.test.empty()) summary["test"] = report_json(fin.test_report);
            summary["final_loss"] = fin.trace.epoch_loss.empty() ? 0.0
                                                                 : fin.trace.epoch_loss.back();
            write_text(fs::path(train_out) / "report.json", summary.dump(2) + "\n");
            Manifest manifest;
            manifest.command = "train";
            manifest.config = {{"dataset", train_ds.path}, {"config_json", train_config_file},
                               {"model", train_model},     {"dim", train_dim},
                               {"epochs", train_epochs},   {"seed", train_seed}};
            manifest.write(train_out, dataset_hash(ds));
            print_report("valid", fin.valid_report);
            if (!ds.test.empty()) print_report("test", fin.test_report);
            return 0;
        }

        if (eval_cmd->parsed()) {
            auto model = load_checkpoint(eval_ckpt);
            auto ds = eval_ds.load();
            const auto& eval_triples = eval_split == "valid" ? ds.valid : ds.test;
            if (eval_triples.empty()) {
                throw std::runtime_error("dataset has no " + eval_split + " split");
            }
            std::vector<Triple> filter = ds.train;
            filter.insert(filter.end(), ds.valid.begin(), ds.valid.end());
            filter.insert(filter.end(), ds.test.begin(), ds.test.end());
            auto rep = evaluate(model, eval_triples, filter);
            print_report(eval_split.c_str(), rep);
            return 0;
        }

        if (transfer->parsed()) {
            sweep.scorer = scorer_from_string(tr_model);
            sweep.techniques = tr_techniques;
            sweep.budgets = tr_budgets;
            auto space = tr_space_file.empty() ? default_space() : load_space(tr_space_file);
            auto ds = tr_ds.load();

            auto reports = transferability_sweep(ds, space, sweep);
            fs::create_directories(tr_out);
            json out = json::array();
            std::printf("%-10s %8s %10s %6s\n", "technique", "budget", "spearman", "n");
            for (const auto& rep : reports) {
                std::printf("%-10s %8.3f %10.4f %6zu  %s\n", rep.technique.c_str(), rep.budget,
                            rep.spearman_rho, rep.n_configs, rep.note.c_str());
                json row;
                row["technique"] = rep.technique;
                row["budget"] = rep.budget;
                row["spearman"] = rep.spearman_rho;
                row["configs"] = rep.n_configs;
                if (!rep.note.empty()) row["note"] = rep.note;
                json pairs = json::array();
                for (const auto& [low, full] : rep.pairs) pairs.push_back({low, full});
                row["pairs"] = pairs;
                out.push_back(row);
            }
            write_text(fs::path(tr_out) / "transfer.json", out.dump(2) + "\n");
            Manifest manifest;
            manifest.command = "transfer";
            manifest.config = {{"dataset", tr_ds.path},
                               {"configs", sweep.n_configs},
                               {"techniques", tr_techniques},
                               {"budgets", tr_budgets},
                               {"full_epochs", sweep.full_epochs},
                               {"model", tr_model},
                               {"dim", sweep.dim},
                               {"seed", sweep.seed}};
            manifest.write(tr_out, dataset_hash(ds));
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
