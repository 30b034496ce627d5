#include "relaylab/cli.hpp"

int main(int argc, char** argv) { return relaylab::cli::run(argc, argv); }
