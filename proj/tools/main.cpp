#include "ipd/cli.hpp"

int main(int argc, char** argv) { return ipd::cli_main(argc, argv); }
