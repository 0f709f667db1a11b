# Optional Doob Core - Test Package
