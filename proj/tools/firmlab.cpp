#include "firmlab/cli.hpp"

int main(int argc, char** argv) { return firmlab::cli::run_main(argc, argv); }
