#include "cli.hpp"

int main(int argc, char** argv) { return coevolve::cli::cli_main(argc, argv); }
