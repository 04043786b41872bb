#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace embedlab::cli {

// Command-line surface: subcommands unigram, train, metrics, probe, compare,
// ablate; global flags --config PATH, --out DIR, --seed N, --quiet.
//
// `args` are the program arguments without argv[0], in natural order.
// Returns the process exit code: 0 success, 1 runtime fault (including
// aborted training runs), 2 config or usage error.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace embedlab::cli
