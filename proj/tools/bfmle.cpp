#include "bfmle/cli.hpp"

int main(int argc, char** argv) { return bfmle::cli::run(argc, argv); }
