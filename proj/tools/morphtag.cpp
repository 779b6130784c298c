#include "morph/cli.hpp"

int main(int argc, char** argv) { return morph::cli::run(argc, argv); }
