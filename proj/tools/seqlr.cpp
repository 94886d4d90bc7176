#include <CLI11.hpp>

#include <iostream>

#include "seqlr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sequential linear response: transfer operators, equivariant families, response series"};
  seqlr::cli::Invocation inv;
  app.add_option("command", inv.command, "certify | equivariant | memory | respond | simulate")
      ->required()
      ->check(CLI::IsMember(seqlr::cli::commands()));
  app.add_option("config", inv.config, "INI experiment config")->required();
  app.add_flag("--emit-gnuplot", inv.emit_gnuplot, "write a gnuplot script next to the CSV output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return seqlr::cli::run(inv, std::cout, std::cerr);
}
