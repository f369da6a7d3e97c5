#include "cli.hpp"

int main(int argc, char** argv) { return qbl::cli::main_entry(argc, argv); }
