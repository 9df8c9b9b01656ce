#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "noonsim/cli.hpp"

int main(int argc, char **argv) {
    namespace cli = noonsim::cli;

    CLI::App app{"Heralded NOON-state simulator for down-conversion sources"};
    app.require_subcommand(1);

    cli::RunOptions opt;
    std::string out_dir;
    std::string format = "csv";
    auto *run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", opt.config, "experiment config (JSON)")->required();
    run->add_option("--out-dir", out_dir,
                    std::string("output directory (default: $") + cli::kOutDirEnv + " or .)");
    run->add_option("--format", format, "artifact format")->check(CLI::IsMember({"csv", "json"}));

    auto *list = app.add_subcommand("list", "list built-in experiments");

    std::string source;
    auto *dump = app.add_subcommand("dump-state", "print the state described by a source config");
    dump->add_option("source", source, "source config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    if (*run) {
        opt.out_dir = out_dir;
        opt.format = format == "json" ? cli::Format::json : cli::Format::csv;
        return cli::run(opt, std::cout, std::cerr);
    }
    if (*list) {
        return cli::list(std::cout);
    }
    return cli::dump_state(source, std::cout, std::cerr);
}
