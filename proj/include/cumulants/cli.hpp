#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cumulants/estimators.hpp"

namespace cumulants {

/// Reads delimited text with a mandatory header row. Columns named
/// "<v>_re" and "<v>_im" form one complex column <v>; a lone half is an
/// error. Blank lines are skipped. Throws DataError with the 1-based data row
/// and column name for non-numeric or non-finite cells.
SampleBatch ingest_delimited(std::istream& in, char delimiter = ',');
SampleBatch ingest_file(const std::string& path, char delimiter = ',');

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitUnsupported = 4;

/// Runs the command line `args` (args[0] is the program name). Results go
/// to `out`; a failure prints one JSON error record to `err` and returns the
/// exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace cumulants
