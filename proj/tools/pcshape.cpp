#include "pcs/cli.hpp"

int main(int argc, char** argv) { return pcs::cli::run(argc, argv); }
