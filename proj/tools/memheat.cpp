#include "memheat/cli.hpp"

int main(int argc, char** argv) { return memheat::cli_main(argc, argv); }
