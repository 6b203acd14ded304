#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,          // unknown subcommand or flag, malformed flag value
  kExitIo = 3,             // unreadable or unwritable file
  kExitSchema = 4,         // input file violates its schema or invariants
  kExitConfiguration = 5,  // parameters outside their valid range
  kExitData = 6,           // inputs too thin for the requested computation
  kExitContract = 7,       // a component broke its contract at run time
};

int exit_code_for(ErrorKind kind) noexcept;
std::string exit_code_table();

// Runs one subcommand; `args` excludes the program name. Errors are printed
// to `err` as a single JSON object and turned into the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat "key = value" lines; '#' starts a comment line. Underscores in keys
// are read as dashes. Throws Error{Io} or Error{Parse}.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

// Large temporaries in the encoder are reused from the heap instead of being
// mapped and faulted in anew on every call.
void tune_allocator() noexcept;

// Hypothesis tracks as [{frame, id, x, y, w, h, kind}].
nlohmann::json tracked_boxes_to_json(const std::vector<eval::TrackedBox>& boxes);
std::vector<eval::TrackedBox> tracked_boxes_from_json(const nlohmann::json& doc);

}  // namespace gigacrowd::cli
