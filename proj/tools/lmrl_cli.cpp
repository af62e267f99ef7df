#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lmrl/errors.hpp"
#include "lmrl/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    uint64_t seed = 0;
    bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--data", opts.data_dir, "dataset directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "root seed (overrides config)")
        ->each([&opts](const std::string&) { opts.has_seed = true; });
}

lmrl::RunConfig resolve(const CommonOpts& opts) {
    lmrl::RunConfig cfg =
        opts.config_path.empty() ? lmrl::RunConfig{} : lmrl::RunConfig::load(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.data_dir.empty()) cfg.data_dir = opts.data_dir;
    if (opts.has_seed) cfg.seed = opts.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"repetitive action counting on synthetic embedding sequences"};
    app.require_subcommand(1);

    CommonOpts gen_opts, train_opts, eval_opts, ablate_opts;
    std::string split = "test";
    std::string suite;
    std::string checkpoint;
    bool dump_density = false;

    CLI::App* cmd_gen = app.add_subcommand("generate", "write a synthetic dataset to disk");
    add_common(cmd_gen, gen_opts);

    CLI::App* cmd_train = app.add_subcommand("train", "train a model on an existing dataset");
    add_common(cmd_train, train_opts);

    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on one split");
    add_common(cmd_eval, eval_opts);
    cmd_eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    cmd_eval->add_option("--split", split, "dataset split (train, val or test)");
    cmd_eval->add_flag("--dump-density", dump_density, "write per-video density CSVs");

    CLI::App* cmd_ablate = app.add_subcommand("ablate", "train and score one ablation suite");
    add_common(cmd_ablate, ablate_opts);
    cmd_ablate->add_option("--suite", suite, "integration, losses or similarity")->required();

    try {
        app.parse(argc, argv);

        if (cmd_gen->parsed()) {
            const lmrl::RunConfig cfg = resolve(gen_opts);
            // --out for generate means the dataset directory
            lmrl::RunConfig gcfg = cfg;
            if (!gen_opts.out_dir.empty()) gcfg.data_dir = gen_opts.out_dir;
            const lmrl::Manifest m = lmrl::cmd_generate(gcfg);
            std::cout << "wrote " << m.train.size() << "/" << m.val.size() << "/"
                      << m.test.size() << " train/val/test sequences to " << gcfg.data_dir
                      << "\n";
        } else if (cmd_train->parsed()) {
            const lmrl::RunConfig cfg = resolve(train_opts);
            const lmrl::TrainResult r = lmrl::cmd_train(cfg);
            std::cout << "best epoch " << r.best_epoch << " val_mae " << r.best_val_mae
                      << " val_obo " << r.best_val_obo << "\ncheckpoint: " << r.best_checkpoint
                      << "\nlog: " << r.log_path << "\n";
        } else if (cmd_eval->parsed()) {
            const lmrl::RunConfig cfg = resolve(eval_opts);
            const lmrl::EvalReport rep = lmrl::cmd_eval(cfg, checkpoint, split, dump_density);
            std::cout << "split " << split << " mae " << rep.mae << " obo " << rep.obo
                      << " frame_acc " << rep.frame_acc << " edit " << rep.edit << " f1@50 "
                      << rep.f1.at(50) << "\nreport: " << cfg.out_dir << "/report.json\n";
        } else if (cmd_ablate->parsed()) {
            const lmrl::RunConfig cfg = resolve(ablate_opts);
            const auto rows = lmrl::cmd_ablate(cfg, suite);
            std::cout << "suite " << suite << " finished with " << rows.size() << " rows\ntable: "
                      << cfg.out_dir << "/ablation_" << suite << ".csv\n";
        }
        return 0;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "lmrl: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lmrl: error: " << e.what() << "\n";
        return 1;
    }
}
