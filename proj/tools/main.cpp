#include "lsbound/cli.hpp"

int main(int argc, char** argv) { return lsbound::cli_dispatch(argc, argv); }
