#include <exception>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  stokeshdg::cli::RunConfig config;
  const int parse_status = stokeshdg::cli::parse_args(argc, argv, config);
  if (parse_status >= 0) return parse_status;
  try {
    return stokeshdg::cli::run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
