#include "levymc/cli.hpp"

int main(int argc, char** argv) { return levymc::cli_main(argc, argv); }
