#include <pffrac/cli.hpp>

int main(int argc, char** argv) { return pffrac::cli_main(argc, argv); }
