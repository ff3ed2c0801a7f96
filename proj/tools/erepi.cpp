#include "erepi/cli.hpp"

int main(int argc, char** argv) { return erepi::cli::run(argc, argv); }
