#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace embedlab::csv {

// Shortest decimal string that parses back to the identical double.
std::string format_double(double v);

// RFC-4180-style field quoting (quotes doubled, field quoted when it contains
// a comma, quote or newline).
std::string escape_field(std::string_view field);

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

  private:
    std::ostream& out_;
};

}  // namespace embedlab::csv
