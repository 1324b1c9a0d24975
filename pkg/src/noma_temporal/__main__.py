from noma_temporal.cli import main

main()
