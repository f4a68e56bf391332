"""Generate the bundled, non-authoritative Ar rate-coefficient sample.

Ionization uses a simple Lotz-like fit, recombination a radiative
(Seaton) term plus three-body recombination at a fixed electron density.
The numbers are only qualitatively Ar-like and are meant for tests and
demos, not for plasma diagnostics.
"""
import math

# Ionization potentials (eV) of Ar^z+, z = 0..17, and outer-shell electron counts.
CHI = [15.760, 27.630, 40.735, 59.58, 74.84, 91.29, 124.41, 143.46, 422.60,
       479.76, 540.4, 619.0, 685.5, 755.1, 855.5, 918.4, 4120.7, 4426.2]
XI = [6, 5, 4, 3, 2, 1, 2, 1, 6, 5, 4, 3, 2, 1, 2, 1, 2, 1]
NE = 3.0e13
FLOOR = 1e-300


def ionization(z, te):
    chi = CHI[z]
    u = te / chi
    s = 1e-5 * XI[z] * math.sqrt(u) / (chi ** 1.5 * (6.0 + u)) * math.exp(-chi / te)
    return max(s, FLOOR)


def recombination(z, te):
    # z is the recombining charge; the recombined state is z-1.
    lam = CHI[z - 1] / te
    bracket = max(0.43 + 0.5 * math.log(lam) + 0.469 * lam ** (-1.0 / 3.0), 0.05)
    radiative = 5.2e-14 * z * math.sqrt(lam) * bracket
    three_body = 8.75e-27 * z ** 3 * te ** -4.5 * NE
    return max(radiative + three_body, FLOOR)


def main():
    grid = [0.5 * 10 ** (4.0 * k / 40) for k in range(41)]
    print("# Qualitatively Ar-like sample rate coefficients. NOT authoritative data.")
    print("# Generated by gen_ar_rates.py; replace with evaluated data for real work.")
    print("# species: Ar")
    print(f"# n_e_cm3: {NE:.1e}")
    print("z,kind,Te_eV,coeff_cm3s")
    for z in range(18):
        for te in grid:
            print(f"{z},S,{te:.6g},{ionization(z, te):.6e}")
    for z in range(1, 19):
        for te in grid:
            print(f"{z},alpha,{te:.6g},{recombination(z, te):.6e}")


if __name__ == "__main__":
    main()
