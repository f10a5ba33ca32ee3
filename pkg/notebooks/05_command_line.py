# %% [markdown]
# # Command line
#
# Every subcommand writes CSV to stdout (or `-o FILE`).  The calls below go through
# `magring.cli.main`, the same entry point as the `magring` script.

# %%
from magring.cli import main

main(["mu-curve", "--a", "0.2", "--p", "4", "--alpha-min", "0", "--alpha-max", "1", "--steps", "6"])

# %%
main(["bifurcation", "--a", "0.45", "--p", "4"])

# %%
main(["nu", "--p", "4", "--alpha", "0"])

# %%
main(["klt", "--a", "0.2", "--p", "4", "--phi", "1,0.5"])

# %%
main(["hardy", "--a", "0.3", "--p", "4", "--phi", "0.05"])

# %% [markdown]
# Invalid input exits with status 2 and a one-line message on stderr.

# %%
print("exit status", main(["nu", "--p", "4", "--alpha", "-0.3"]))
