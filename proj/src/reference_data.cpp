// GOE Delta3 reference: 40 sequences of 2000 levels, seed 2024.
// Generated by `chaotherm reference`; do not edit.
#include <cstddef>

namespace chaotherm::detail {

extern const std::size_t goe_reference_size = 60;
extern const double goe_reference_L[] = {
    1,
    2,
    3,
    4,
    5,
    6,
    7,
    8,
    9,
    10,
    11,
    12,
    13,
    14,
    15,
    16,
    17,
    18,
    19,
    20,
    21,
    22,
    23,
    24,
    25,
    26,
    27,
    28,
    29,
    30,
    31,
    32,
    33,
    34,
    35,
    36,
    37,
    38,
    39,
    40,
    41,
    42,
    43,
    44,
    45,
    46,
    47,
    48,
    49,
    50,
    51,
    52,
    53,
    54,
    55,
    56,
    57,
    58,
    59,
    60,
};
extern const double goe_reference_value[] = {
    0.060451149955528687,
    0.10210640466791987,
    0.13193755683754718,
    0.15482639276877161,
    0.17364877075604229,
    0.18933160199112609,
    0.20246026932059033,
    0.21445897950215451,
    0.22482234904648596,
    0.23370271803468304,
    0.24246573743285915,
    0.25088513554085429,
    0.2581893965010752,
    0.26475568547704281,
    0.27078322960812512,
    0.277086978089433,
    0.28268723134884555,
    0.28875397604531189,
    0.29310140229769538,
    0.29845262803225486,
    0.30363189670074481,
    0.30669161753707613,
    0.31102355004106613,
    0.3169950601186905,
    0.31964897444567952,
    0.32365822865965016,
    0.32774230163481827,
    0.3311832753060186,
    0.33400480898255902,
    0.33811691199851385,
    0.34057396388529237,
    0.34432942697332325,
    0.34677259139338257,
    0.35108540234117297,
    0.35380625711309921,
    0.35610783349429648,
    0.35960255901565091,
    0.36182598693432622,
    0.3636540197588996,
    0.36784430997965367,
    0.36910636909928768,
    0.3723478114674561,
    0.37432127845595348,
    0.37629688776014486,
    0.37908248628546493,
    0.38173233141259311,
    0.38374528478482745,
    0.38534851169297929,
    0.38817318033496845,
    0.39030275828382516,
    0.39112166758152433,
    0.39393801774324338,
    0.39522539436173321,
    0.39698065167896024,
    0.39848561891313911,
    0.39920872525626694,
    0.4014080692899748,
    0.40298782322409932,
    0.40499682540120585,
    0.40852457856644997,
};
extern const double goe_reference_stderr[] = {
    0.00010228777918760347,
    0.00017821957585554055,
    0.00028262587097171792,
    0.0003743521580742844,
    0.00046546875169741083,
    0.00054596885855571228,
    0.00062411617796989953,
    0.00068247774042123302,
    0.00074331395304698552,
    0.00078739533116397719,
    0.0008428230637664327,
    0.00091702355808697875,
    0.00094944008378521311,
    0.0010070709787606616,
    0.0010350071491456356,
    0.0011053995201967032,
    0.0011412513984519839,
    0.0011963318004463977,
    0.0012117658836035164,
    0.0012603570913479827,
    0.0013003142783798345,
    0.0013195890938493317,
    0.0013710439481494779,
    0.001442138220963325,
    0.001463651154275557,
    0.0015002603085231296,
    0.0015799392563374192,
    0.0015554323119953085,
    0.0016029095677694879,
    0.0016556917575609698,
    0.0016904030712980957,
    0.0016888694491350232,
    0.0017597796114804101,
    0.0017960599560951822,
    0.001807884817302657,
    0.0019043528899717376,
    0.0019086201063855332,
    0.0019886134304576042,
    0.001933871922550706,
    0.0020522788418893458,
    0.0020179781628492043,
    0.0020291951576996998,
    0.0020836504357861644,
    0.0021440565971704074,
    0.0022038109741110328,
    0.0022141728421627206,
    0.0022407859103550764,
    0.0023152599793237545,
    0.0023856155856885192,
    0.0024493772271070931,
    0.0023776475271650756,
    0.0023946247352795635,
    0.0024008178611416658,
    0.0024259015917312008,
    0.0024110440037938955,
    0.0024607498033126737,
    0.0024493617076434058,
    0.0025534627153557953,
    0.0025409360605235624,
    0.0026679517143688397,
};

}  // namespace chaotherm::detail
