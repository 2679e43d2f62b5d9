#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lapt/bench.hpp"
#include "lapt/orchestrator.hpp"
#include "lapt/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct BackendOptions {
    std::string backend = "stat";
    int keep_m = 2;
    int keep_s = 2;
    double retention = 0.5;
    std::string template_path;
    std::string endpoint = lapt::LlmConfig{}.endpoint;
    std::string model = lapt::LlmConfig{}.model;
    std::string api_key_env = lapt::LlmConfig{}.api_key_env;
    int max_retries = 2;
};

void add_backend_options(CLI::App* cmd, BackendOptions& opts) {
    cmd->add_option("--backend", opts.backend, "Reasoner backend")->check(CLI::IsMember({"stat", "llm"}));
    cmd->add_option("--keep-m", opts.keep_m, "Operators kept per layer (stat backend)");
    cmd->add_option("--keep-s", opts.keep_s, "Sources kept per layer (stat backend)");
    cmd->add_option("--retention", opts.retention, "Fraction of previous sets kept on adapt (stat backend)");
    cmd->add_option("--template", opts.template_path, "Prompt template file (llm backend)");
    cmd->add_option("--endpoint", opts.endpoint, "Chat completions endpoint (llm backend)");
    cmd->add_option("--model", opts.model, "Model id (llm backend)");
    cmd->add_option("--api-key-env", opts.api_key_env, "Environment variable holding the API key");
    cmd->add_option("--max-retries", opts.max_retries, "Re-asks after malformed replies (llm backend)");
}

std::unique_ptr<lapt::Reasoner> make_reasoner(const BackendOptions& opts,
                                              const std::string& transcript_dir) {
    if (opts.backend == "stat") {
        return std::make_unique<lapt::StatReasoner>(
            lapt::StatParams{opts.keep_m, opts.keep_s, opts.retention, false});
    }
    if (opts.template_path.empty()) {
        throw lapt::TemplateMissing("--template is required for the llm backend");
    }
    lapt::LlmConfig config;
    config.endpoint = opts.endpoint;
    config.model = opts.model;
    config.api_key_env = opts.api_key_env;
    config.max_retries = opts.max_retries;
    auto tmpl = lapt::PromptTemplate::load(opts.template_path);
    return std::make_unique<lapt::LlmReasoner>(config, std::move(tmpl),
                                               lapt::make_http_transport(config), transcript_dir);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Design-principle-guided architecture search over tabular benchmarks"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark table");
    std::string space_id, output, tasks_arg = "t0";
    std::uint64_t seed = 0;
    double interaction = 0.0, noise = 0.0;
    synth->add_option("--space", space_id, "Space id")->required();
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--interaction", interaction, "Pairwise interaction strength");
    synth->add_option("--noise", noise, "Noise sigma");
    synth->add_option("--tasks", tasks_arg, "Comma-separated task names");
    synth->add_option("-o,--output", output, "Output benchmark JSON")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Convert a CSV export into a benchmark table");
    std::string csv_path;
    ingest->add_option("--csv", csv_path, "CSV with header arch_key,task,value")->required();
    ingest->add_option("--space", space_id, "Space id")->required();
    ingest->add_option("-o,--output", output, "Output benchmark JSON")->required();

    // learn
    auto* learn = app.add_subcommand("learn", "Learn a design principle from top architectures");
    std::string bench_path, task_name;
    std::size_t top = 50;
    BackendOptions learn_backend;
    learn->add_option("--bench", bench_path, "Benchmark JSON")->required();
    learn->add_option("--task", task_name, "Source task")->required();
    learn->add_option("--top", top, "Archive size");
    add_backend_options(learn, learn_backend);
    learn->add_option("-o,--output", output, "Output principle JSON")->required();

    // run
    auto* run = app.add_subcommand("run", "Run the full transfer-and-adapt search");
    std::string principle_path, config_path, outdir;
    int seeds = 1;
    bool no_transfer = false, no_adaptation = false;
    BackendOptions run_backend;
    run->add_option("--bench", bench_path, "Benchmark JSON")->required();
    run->add_option("--tasks", tasks_arg, "Comma-separated target tasks")->required();
    run->add_option("--principle", principle_path, "Initial principle JSON");
    run->add_option("--config", config_path, "Run configuration JSON");
    run->add_option("--seeds", seeds, "Number of seeds");
    run->add_option("--seed", seed, "Base seed");
    run->add_flag("--no-transfer", no_transfer, "Start from the unconstrained principle");
    run->add_flag("--no-adaptation", no_adaptation, "Never update the principle");
    add_backend_options(run, run_backend);
    run->add_option("-o,--outdir", outdir, "Run directory")->required();

    // eedf
    auto* eedf_cmd = app.add_subcommand("eedf", "Export the error EDF of a (sub)space");
    eedf_cmd->add_option("--bench", bench_path, "Benchmark JSON")->required();
    eedf_cmd->add_option("--task", task_name, "Task")->required();
    eedf_cmd->add_option("--principle", principle_path, "Constrain to this principle's subspace");
    eedf_cmd->add_option("-o,--output", output, "Output CSV")->required();

    // rank
    auto* rank = app.add_subcommand("rank", "Model rank of one architecture");
    std::string key;
    rank->add_option("--bench", bench_path, "Benchmark JSON")->required();
    rank->add_option("--task", task_name, "Task")->required();
    rank->add_option("--key", key, "ArchKey")->required();

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        auto space = lapt::SpaceDescriptor::make(space_id);
        std::vector<lapt::TaskSpec> tasks;
        for (const auto& t : split_csv(tasks_arg)) tasks.push_back({t, t, lapt::Direction::Maximize});
        auto table = lapt::synth_generate(space, {seed, interaction, noise}, tasks);
        table.save(output);
        std::cout << "wrote " << table.size() << " records to " << output << "\n";
    } else if (ingest->parsed()) {
        auto table = lapt::ingest_csv(csv_path, lapt::SpaceDescriptor::make(space_id));
        table.save(output);
        std::cout << "wrote " << table.size() << " records to " << output << "\n";
    } else if (learn->parsed()) {
        auto table = lapt::BenchmarkTable::load(bench_path);
        auto reasoner = make_reasoner(learn_backend, fs::path(output).parent_path().string());
        auto principle = lapt::learn_stage(table, task_name, top, *reasoner);
        write_file(output, lapt::serialize(principle).dump(2) + "\n");
        std::cout << "wrote principle to " << output << "\n";
    } else if (run->parsed()) {
        auto table = lapt::BenchmarkTable::load(bench_path);
        lapt::LaptConfig config = lapt::LaptConfig::defaults_for(table.space().space_id);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config: " + config_path);
            json cj;
            in >> cj;
            config = lapt::LaptConfig::from_json(cj);
        }
        config.transfer_enabled = !no_transfer;
        config.adaptation_enabled = !no_adaptation;

        fs::create_directories(outdir);
        auto reasoner = make_reasoner(run_backend, (fs::path(outdir) / "llm").string());

        lapt::DesignPrinciple initial = [&] {
            if (!principle_path.empty()) {
                std::ifstream in(principle_path);
                if (!in) throw std::runtime_error("cannot open principle: " + principle_path);
                json pj;
                in >> pj;
                return lapt::deserialize(pj, table.space());
            }
            return lapt::DesignPrinciple::all(table.space(), {});
        }();

        write_file((fs::path(outdir) / "config.json").string(), config.to_json().dump(2) + "\n");

        auto tasks = split_csv(tasks_arg);
        std::vector<lapt::LaptResult> all_results;
        for (int s = 0; s < seeds; ++s) {
            lapt::LaptConfig seeded = config;
            seeded.seed = seed + static_cast<std::uint64_t>(s);
            auto results = lapt::run_suite(tasks, table, initial, seeded, *reasoner);
            fs::path seed_dir = fs::path(outdir) / ("seed-" + std::to_string(s));
            fs::create_directories(seed_dir / "principles");
            fs::create_directories(seed_dir / "traces");
            for (const auto& r : results) {
                for (std::size_t g = 0; g < r.lineage.size(); ++g) {
                    write_file((seed_dir / "principles" / (r.task + "-gen-" + std::to_string(g) + ".json")).string(),
                               lapt::serialize(r.lineage[g]).dump(2) + "\n");
                }
                for (std::size_t g = 0; g < r.traces.size(); ++g) {
                    write_file((seed_dir / "traces" / ("task-" + r.task + "-g" + std::to_string(g + 1) + ".jsonl")).string(),
                               r.traces[g].to_jsonl());
                }
            }
            all_results.insert(all_results.end(), results.begin(), results.end());
        }
        json result_doc;
        result_doc["summary"] = lapt::summarize(all_results, table);
        result_doc["runs"] = json::array();
        for (const auto& r : all_results) result_doc["runs"].push_back(r.to_json());
        write_file((fs::path(outdir) / "result.json").string(), result_doc.dump(2) + "\n");
        std::cout << result_doc["summary"].dump(2) << "\n";
    } else if (eedf_cmd->parsed()) {
        auto table = lapt::BenchmarkTable::load(bench_path);
        lapt::EedfCurve curve;
        if (!principle_path.empty()) {
            std::ifstream in(principle_path);
            if (!in) throw std::runtime_error("cannot open principle: " + principle_path);
            json pj;
            in >> pj;
            auto constraints = lapt::to_constraints(lapt::deserialize(pj, table.space()), table.space());
            curve = lapt::eedf(table, task_name, &constraints, "refined");
        } else {
            curve = lapt::eedf(table, task_name, nullptr, "original");
        }
        write_file(output, curve.to_csv());
        std::cout << "wrote " << curve.breakpoints.size() << " breakpoints (n=" << curve.n << ") to "
                  << output << "\n";
    } else if (rank->parsed()) {
        auto table = lapt::BenchmarkTable::load(bench_path);
        std::cout << table.model_rank(key, task_name) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const lapt::TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const lapt::EmptyRefinedSpace& e) {
        std::cerr << "error: " << e.what() << "\nprinciple:\n" << e.principle_doc << "\n";
        return 4;
    } catch (const lapt::EmptySubspace& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const lapt::ConstraintEmpty& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const lapt::EmptyLayer& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
