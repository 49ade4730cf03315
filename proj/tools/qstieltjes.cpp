#include "qstieltjes/cli.hpp"

int main(int argc, char** argv) { return qstieltjes::cli::run(argc, argv); }
