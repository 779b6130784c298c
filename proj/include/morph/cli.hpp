#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace morph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: schema, train, finetune, predict, evaluate, typology.
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// "hi_hdtb-um-train.conllu" -> "hi_hdtb"
std::string language_from_path(const std::string& path);

}  // namespace morph::cli
