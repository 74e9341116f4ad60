#ifndef FMC_CLI_HPP
#define FMC_CLI_HPP

#include <string>
#include <vector>

#include "fmc/machine.hpp"

namespace fmc {

struct CliResult {
  int code = 0;    // 0 success, 1 expected negative result, 2 usage/parse error
  std::string out; // standard output
  std::string err; // standard error
};

// The batch front end. argv excludes the program name. Pure: identical
// inputs give byte-identical outputs (FMC_SEED seeds self-test generation).
CliResult dispatch(const std::vector<std::string>& argv);

// Inline text or @path to a file.
std::string load_input(const std::string& arg);

// "a:[*, <x>.x] b:[y]" with the top of each stack last.
// Throws std::invalid_argument on malformed specs.
Memory parse_memory_literal(const std::string& spec);

} // namespace fmc

#endif
