#include "cli/commands.hpp"

int main(int argc, char** argv) { return strobo::cli::run_main(argc, argv); }
