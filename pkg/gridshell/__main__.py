from gridshell.cli import cli

cli(prog_name="gridshell")
