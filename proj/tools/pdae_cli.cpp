#include "dynbc/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Parabolic problems with dynamic boundary conditions as constrained PDAEs"};
    app.require_subcommand(1);

    std::string config;
    for (const char* name : {"solve", "study", "infsup"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config, "TOML or JSON configuration file")->required();
    }
    app.add_subcommand("list-presets", "Print the manufactured presets and geometries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << dynbc::error_json("usage", e.what()) << '\n';
        return dynbc::exit_config;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return dynbc::run_command(command, config, std::cout, std::cerr);
}
