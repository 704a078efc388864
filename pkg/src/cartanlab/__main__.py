from cartanlab.cli import main

main()
