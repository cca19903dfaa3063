#include "fracalc/cli.hpp"

int main(int argc, char** argv) { return fracalc::cli::dispatch(argc, argv); }
