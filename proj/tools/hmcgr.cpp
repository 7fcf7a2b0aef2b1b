#include "hmcgr/cli.hpp"

int main(int argc, char** argv) { return hmcgr::cli::run(argc, argv); }
