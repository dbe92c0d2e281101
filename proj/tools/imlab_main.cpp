#include "imlab/cli.hpp"

int main(int argc, char** argv) { return imlab::cli::run(argc, argv); }
