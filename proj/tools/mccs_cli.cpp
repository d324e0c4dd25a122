#include "commands.hpp"

int main(int argc, char **argv) { return mccs::cli::run(argc, argv); }
