// (x, lower, upper): the binary64 numbers just below and above the value at
// the binary64 point x, from 200-bit arithmetic.
pub const E1_ORACLE: [(f64, f64, f64); 20] = [
    (0.01, 4.037929576538113, 4.037929576538114),
    (0.1, 1.8229239584193906, 1.8229239584193908),
    (0.5, 0.5597735947761607, 0.5597735947761608),
    (1.0, 0.21938393439552026, 0.21938393439552029),
    (1.5, 0.10001958240663264, 0.10001958240663265),
    (2.5, 0.024914917870269733, 0.024914917870269736),
    (3.7, 0.005447824656770462, 0.005447824656770463),
    (5.0, 0.0011482955912753257, 0.001148295591275326),
    (6.0, 0.0003600824521626586, 0.0003600824521626587),
    (7.5, 6.583089326708023e-05, 6.583089326708024e-05),
    (8.0, 3.76656228439249e-05, 3.7665622843924906e-05),
    (9.25, 9.453882399809165e-06, 9.453882399809167e-06),
    (12.0, 4.7510818246724936e-07, 4.751081824672494e-07),
    (16.5, 3.911920796827056e-09, 3.911920796827057e-09),
    (20.0, 9.835525290649882e-11, 9.835525290649883e-11),
    (24.9, 5.93433403946554e-13, 5.934334039465541e-13),
    (25.0, 5.348899755340216e-13, 5.348899755340217e-13),
    (30.0, 3.0215520106888124e-15, 3.021552010688813e-15),
    (40.0, 1.0367732614516569e-19, 1.036773261451657e-19),
    (50.0, 3.783264029550458e-24, 3.783264029550459e-24),
];
pub const J1_ORACLE: [(f64, f64, f64); 20] = [
    (0.01, 0.004999937500260416, 0.004999937500260417),
    (0.1, 0.049937526036242, 0.049937526036242005),
    (0.5, 0.24226845767487387, 0.2422684576748739),
    (1.0, 0.4400505857449335, 0.44005058574493355),
    (1.5, 0.5579365079100996, 0.5579365079100997),
    (2.5, 0.497094102464274, 0.49709410246427405),
    (3.7, 0.05383398774546179, 0.053833987745461796),
    (5.0, -0.32757913759146523, -0.3275791375914652),
    (6.0, -0.27668385812756563, -0.2766838581275656),
    (7.5, 0.13524842757970548, 0.1352484275797055),
    (8.0, 0.2346363468539146, 0.23463634685391463),
    (9.25, 0.2091466504701211, 0.20914665047012113),
    (12.0, -0.22344710449062763, -0.2234471044906276),
    (16.5, -0.005764213735631228, -0.005764213735631227),
    (20.0, 0.06683312417585004, 0.06683312417585005),
    (24.9, -0.13485569953140888, -0.13485569953140886),
    (25.0, -0.12535024958028992, -0.1253502495802899),
    (30.0, -0.11875106261662294, -0.11875106261662292),
    (40.0, 0.12603831803758497, 0.126038318037585),
    (50.0, -0.09751182812517514, -0.09751182812517513),
];
