from fortag.cli import main

main()
